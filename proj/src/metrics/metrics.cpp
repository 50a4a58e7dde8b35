#include "fd3/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fd3/error.hpp"
#include "fd3/simd/kernels.hpp"

namespace fd3 {
namespace {

struct Moments {
  std::vector<double> mean;
  std::vector<double> sd;
};

void check_sets(const FeatureSet& ref, const FeatureSet& test) {
  if (ref.size() < 2 || test.size() < 2) throw ArgumentError("fid: each feature set needs at least 2 samples");
  const std::size_t k = ref.front().size();
  if (k == 0) throw ArgumentError("fid: empty feature vectors");
  for (const FeatureSet* set : {&ref, &test}) {
    for (const auto& f : *set) {
      if (f.size() != k) throw ArgumentError("fid: feature dimension mismatch");
    }
  }
}

Moments moments(const FeatureSet& set) {
  const std::size_t k = set.front().size();
  const double n = static_cast<double>(set.size());
  Moments m{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  for (const auto& f : set) {
    for (std::size_t d = 0; d < k; ++d) m.mean[d] += f[d];
  }
  for (double& v : m.mean) v /= n;
  for (const auto& f : set) {
    for (std::size_t d = 0; d < k; ++d) m.sd[d] += (f[d] - m.mean[d]) * (f[d] - m.mean[d]);
  }
  for (double& v : m.sd) v = std::sqrt(v / n);
  return m;
}

Eigen::MatrixXd to_matrix(const FeatureSet& set) {
  Eigen::MatrixXd m(set.size(), set.front().size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t d = 0; d < set[i].size(); ++d) m(i, d) = set[i][d];
  }
  return m;
}

}  // namespace

double psnr(const Image& x, const Image& xhat) {
  require_same_shape(x, xhat, "psnr");
  const std::size_t n = x.values().size();
  const double mse = simd::active().sum_sq_diff_f64(n, x.data(), xhat.data()) / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(x.values().begin(), x.values().end());
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

double fid_gaussian(const FeatureSet& ref, const FeatureSet& test) {
  check_sets(ref, test);
  const Moments a = moments(ref);
  const Moments b = moments(test);
  double total = 0.0;
  for (std::size_t d = 0; d < a.mean.size(); ++d) {
    const double dm = a.mean[d] - b.mean[d];
    const double ds = a.sd[d] - b.sd[d];
    total += dm * dm + ds * ds;
  }
  return total;
}

double fid_frechet(const FeatureSet& ref, const FeatureSet& test) {
  check_sets(ref, test);
  const Eigen::MatrixXd a = to_matrix(ref);
  const Eigen::MatrixXd b = to_matrix(test);
  const Eigen::RowVectorXd mu_a = a.colwise().mean();
  const Eigen::RowVectorXd mu_b = b.colwise().mean();
  const Eigen::MatrixXd ca = a.rowwise() - mu_a;
  const Eigen::MatrixXd cb = b.rowwise() - mu_b;
  const Eigen::MatrixXd sa = ca.transpose() * ca / static_cast<double>(a.rows());
  const Eigen::MatrixXd sb = cb.transpose() * cb / static_cast<double>(b.rows());

  // tr(sqrt(Sa Sb)) = tr(sqrt(Sa^1/2 Sb Sa^1/2)), which is symmetric PSD.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(sa);
  const Eigen::VectorXd la = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root_a = ea.eigenvectors() * la.asDiagonal() * ea.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(root_a * sb * root_a);
  const double cross = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double value = (mu_a - mu_b).squaredNorm() + sa.trace() + sb.trace() - 2.0 * cross;
  return std::max(0.0, value);
}

SegmentationMask::SegmentationMask(int height, int width) : height_(height), width_(width) {
  if (height < 1 || width < 1) throw ArgumentError("SegmentationMask: sides must be >= 1");
  bits_.assign(static_cast<std::size_t>(height) * width, 0);
}

std::size_t SegmentationMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

double iou(const SegmentationMask& a, const SegmentationMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw ArgumentError("iou: mask shape mismatch");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.bits().size(); ++i) {
    inter += a.bits()[i] & b.bits()[i];
    uni += a.bits()[i] | b.bits()[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MetricReport evaluate(std::span<const ImagePair> pairs, const FeatureExtractor& extractor,
                      const Segmenter* segmenter) {
  if (pairs.empty()) throw ArgumentError("evaluate: no image pairs");
  MetricReport r;
  r.n_images = pairs.size();
  FeatureSet ref;
  FeatureSet test;
  double finite_sum = 0.0;
  std::size_t finite_count = 0;
  double iou_sum = 0.0;
  for (const ImagePair& p : pairs) {
    const double v = psnr(*p.gt, *p.est);
    r.psnr.push_back(v);
    if (std::isinf(v)) {
      ++r.psnr_inf_count;
    } else {
      finite_sum += v;
      ++finite_count;
    }
    ref.push_back(extractor.extract(*p.gt));
    test.push_back(extractor.extract(*p.est));
    if (segmenter != nullptr) {
      r.iou.push_back(iou(segmenter->segment(*p.gt), segmenter->segment(*p.est)));
      iou_sum += r.iou.back();
    }
  }
  if (finite_count > 0) r.psnr_mean = finite_sum / static_cast<double>(finite_count);
  if (pairs.size() >= 2) r.fid = fid_gaussian(ref, test);
  if (segmenter != nullptr) r.iou_mean = iou_sum / static_cast<double>(pairs.size());
  return r;
}

}  // namespace fd3
