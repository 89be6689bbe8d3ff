#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dabridge/vec.hpp"

namespace dabridge {

inline constexpr double kPsnrCapDb = 99.0;

// 10 log10(peak^2 / MSE); +infinity when the inputs are identical.
double psnr(const Vec& a, const Vec& b, double peak);

// Same, capped at 99 dB for CSV friendliness.
double psnr_capped(const Vec& a, const Vec& b, double peak);

// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), K1=0.01,
// K2=0.03, L=peak. The window is clipped to the image when side < 11.
double ssim(const Vec& a, const Vec& b, int side, double peak = 1.0);

// Elementwise sample standard deviation (Bessel-corrected) across trials,
// averaged over elements. Needs at least two trials.
double trial_std(std::span<const Vec> outputs);

struct MomentDistance {
    double mean_gap = 0.0;  // L2 gap between empirical means
    double cov_gap = 0.0;   // Frobenius gap between empirical covariances
};

MomentDistance moment_distance(std::span<const Vec> samples_a, std::span<const Vec> samples_b);

// One line of the benchmark tables. std / mean_gap / cov_gap describe the
// (sampler, steps) cell the trial belongs to and repeat on each trial row.
struct MetricsRow {
    std::string sampler;
    int steps = 0;
    int trial = 0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double std_dev = 0.0;
    double mean_gap = 0.0;
    double cov_gap = 0.0;
};

// Fixed schema, 6 significant digits, rows ordered by (sampler, steps, trial).
void write_metrics_csv(std::ostream& out, std::vector<MetricsRow> rows);

std::string format_csv_value(double v);

}  // namespace dabridge
