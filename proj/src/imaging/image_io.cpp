#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

// jpeglib.h expects FILE and size_t to be declared first.
#include <jpeglib.h>

#include "fd3/error.hpp"
#include "fd3/image.hpp"

namespace fd3 {
namespace {

struct Raster {
  int height = 0;
  int width = 0;
  std::vector<unsigned char> rgb;
};

Image to_image(const Raster& r, const std::filesystem::path& path) {
  if (r.height < Image::kMinSide || r.width < Image::kMinSide) {
    throw DecodeError(path.string() + ": image smaller than " + std::to_string(Image::kMinSide) + " pixels");
  }
  Image img(r.height, r.width);
  std::transform(r.rgb.begin(), r.rgb.end(), img.data(),
                 [](unsigned char v) { return static_cast<double>(v) / 255.0; });
  return img;
}

Raster decode_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&png, path.c_str()) == 0) {
    throw DecodeError(path.string() + ": " + png.message);
  }
  if ((png.format & PNG_FORMAT_FLAG_COLOR) == 0) {
    png_image_free(&png);
    throw DecodeError(path.string() + ": greyscale PNG, expected 8-bit RGB");
  }
  if ((png.format & PNG_FORMAT_FLAG_LINEAR) != 0) {
    png_image_free(&png);
    throw DecodeError(path.string() + ": 16-bit PNG, expected 8-bit RGB");
  }
  png.format = PNG_FORMAT_RGB;
  Raster r;
  r.height = static_cast<int>(png.height);
  r.width = static_cast<int>(png.width);
  r.rgb.resize(PNG_IMAGE_SIZE(png));
  if (png_image_finish_read(&png, nullptr, r.rgb.data(), 0, nullptr) == 0) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw DecodeError(path.string() + ": " + msg);
  }
  return r;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Plain C state only between setjmp and the last libjpeg call.
bool decode_jpeg_raw(std::FILE* file, Raster& r, JpegError& err, bool& grey) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components == 1) {
    grey = true;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  r.width = static_cast<int>(cinfo.output_width);
  r.height = static_cast<int>(cinfo.output_height);
  r.rgb.resize(static_cast<std::size_t>(r.width) * r.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = r.rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * r.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Raster decode_jpeg(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw IoError(path.string() + ": cannot open");
  Raster r;
  JpegError err{};
  bool grey = false;
  if (!decode_jpeg_raw(file.get(), r, err, grey)) {
    if (grey) throw DecodeError(path.string() + ": greyscale JPEG, expected 8-bit RGB");
    throw DecodeError(path.string() + ": " + err.message);
  }
  return r;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError(path.string() + ": no such file");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  unsigned char magic[8] = {};
  in.read(reinterpret_cast<char*>(magic), sizeof(magic));
  if (in.gcount() >= 8 && png_sig_cmp(magic, 0, 8) == 0) return to_image(decode_png(path), path);
  if (in.gcount() >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) {
    return to_image(decode_jpeg(path), path);
  }
  throw DecodeError(path.string() + ": not a PNG or JPEG file");
}

void save_png(const Image& img, const std::filesystem::path& path) {
  std::vector<unsigned char> rgb(img.size());
  std::transform(img.values().begin(), img.values().end(), rgb.begin(), [](double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = PNG_FORMAT_RGB;
  if (png_image_write_to_file(&png, path.c_str(), 0, rgb.data(), 0, nullptr) == 0) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError(path.string() + ": " + msg);
  }
}

}  // namespace fd3
