// Writes synthetic fundus phantoms: fd3_phantoms OUT_DIR COUNT [SIZE] [SEED]
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "fd3/phantom.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: fd3_phantoms OUT_DIR COUNT [SIZE=64] [SEED=0]\n";
    return 1;
  }
  try {
    const std::filesystem::path dir = argv[1];
    const int count = std::stoi(argv[2]);
    const int size = argc > 3 ? std::stoi(argv[3]) : 64;
    const std::uint64_t seed = argc > 4 ? std::stoull(argv[4]) : 0;
    std::filesystem::create_directories(dir);
    for (int i = 0; i < count; ++i) {
      fd3::Rng rng(fd3::derive_seed(seed, static_cast<std::uint64_t>(i)));
      char name[32];
      std::snprintf(name, sizeof(name), "phantom_%04d.png", i);
      fd3::save_png(fd3::make_phantom(size, rng), dir / name);
    }
  } catch (const std::exception& e) {
    std::cerr << "fd3_phantoms: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
