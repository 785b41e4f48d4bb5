#include "radiant/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace radiant {

double gaussian_nll(const Vec3& true_rgb, const Vec3& mu, double psi_sq) {
  const double v = std::max(psi_sq, kVarianceFloor);
  const double log_term = 0.5 * std::log(2.0 * std::numbers::pi * v);
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double r = true_rgb[c] - mu[c];
    sum += log_term + r * r / (2.0 * v);
  }
  return sum / 3.0;
}

double predictive_variance(const PixelStats& stats, VarianceTerms terms) {
  switch (terms) {
    case VarianceTerms::kRgbOnly:
      return stats.var_rgb_mean;
    case VarianceTerms::kEpistemicOnly:
      return stats.var_epi;
    case VarianceTerms::kCombined:
      break;
  }
  return stats.psi_sq;
}

namespace {
void check_dims(int w, int h, const Image& truth) {
  if (w != truth.width || h != truth.height) {
    throw std::invalid_argument("metrics: image dimensions differ");
  }
}
}  // namespace

std::vector<double> pixel_nll(const StatsImage& stats, const Image& truth, VarianceTerms terms) {
  check_dims(stats.width, stats.height, truth);
  std::vector<double> out(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const PixelStats& s = stats.pixels[i];
    out[i] = gaussian_nll(truth.pixels[i], s.mu_rgb, predictive_variance(s, terms));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

NllSummary image_nll(const StatsImage& stats, const Image& truth, VarianceTerms terms) {
  std::vector<double> nll = pixel_nll(stats, truth, terms);
  if (nll.empty()) throw std::invalid_argument("image_nll: empty image");
  const double mean = std::accumulate(nll.begin(), nll.end(), 0.0) / static_cast<double>(nll.size());
  return {mean, median(std::move(nll))};
}

NllReport aggregate_nll(std::span<const NllSummary> per_image) {
  if (per_image.empty()) throw std::invalid_argument("aggregate_nll: no images");
  NllReport report;
  report.per_image.assign(per_image.begin(), per_image.end());
  const double n = static_cast<double>(per_image.size());
  for (const auto& s : per_image) {
    report.mean_of_means += s.mean / n;
    report.mean_of_medians += s.median / n;
  }
  double var_means = 0.0;
  double var_medians = 0.0;
  for (const auto& s : per_image) {
    var_means += (s.mean - report.mean_of_means) * (s.mean - report.mean_of_means) / n;
    var_medians += (s.median - report.mean_of_medians) * (s.median - report.mean_of_medians) / n;
  }
  report.std_of_means = std::sqrt(var_means);
  report.std_of_medians = std::sqrt(var_medians);
  return report;
}

double psnr(const Image& image, const Image& truth) {
  check_dims(image.width, image.height, truth);
  if (image.size() == 0) throw std::invalid_argument("psnr: empty image");
  double sum = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    sum += (image.pixels[i] - truth.pixels[i]).squaredNorm();
  }
  const double mse = sum / (3.0 * static_cast<double>(image.size()));
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

std::vector<double> rescale_psnr(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("rescale_psnr: empty series");
  const double first = series.front();
  const double best = *std::max_element(series.begin(), series.end());
  std::vector<double> out(series.size(), 0.0);
  if (!(best > first)) return out;
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - first) / (best - first);
  return out;
}

}  // namespace radiant
