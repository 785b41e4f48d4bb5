#pragma once

#include "radiant/geometry.hpp"
#include "radiant/uncertainty.hpp"

#include <span>
#include <vector>

namespace radiant {

inline constexpr double kVarianceFloor = 1e-6;
inline constexpr double kPsnrCap = 99.0;

// Channel-averaged NLL of the true colour under N(mu, I * max(psi_sq, floor)).
double gaussian_nll(const Vec3& true_rgb, const Vec3& mu, double psi_sq);

// Which terms make up the predictive variance.
enum class VarianceTerms { kCombined, kRgbOnly, kEpistemicOnly };

double predictive_variance(const PixelStats& stats, VarianceTerms terms);

std::vector<double> pixel_nll(const StatsImage& stats, const Image& truth,
                              VarianceTerms terms = VarianceTerms::kCombined);

struct NllSummary {
  double mean = 0.0;
  double median = 0.0;
};

// Mean and median of the per-pixel NLL over one image.
NllSummary image_nll(const StatsImage& stats, const Image& truth,
                     VarianceTerms terms = VarianceTerms::kCombined);

// Median; even counts average the two central values. Throws when empty.
double median(std::vector<double> values);

struct NllReport {
  std::vector<NllSummary> per_image;
  double mean_of_means = 0.0;
  double mean_of_medians = 0.0;
  double std_of_means = 0.0;    // population standard deviation across images
  double std_of_medians = 0.0;
};

NllReport aggregate_nll(std::span<const NllSummary> per_image);

// -10 log10(MSE); identical images give kPsnrCap.
double psnr(const Image& image, const Image& truth);

// (x - first) / (max - first); all zeros when max == first.
std::vector<double> rescale_psnr(std::span<const double> series);

}  // namespace radiant
