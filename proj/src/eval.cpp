#include "dabridge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace dabridge {

double psnr(const Vec& a, const Vec& b, double peak) {
    require_same_dim(a, b, "psnr");
    if (a.empty()) throw std::invalid_argument("psnr: empty input");
    if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be > 0");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double psnr_capped(const Vec& a, const Vec& b, double peak) {
    return std::min(psnr(a, b, peak), kPsnrCapDb);
}

double ssim(const Vec& a, const Vec& b, int side, double peak) {
    if (side < 4) throw std::invalid_argument("ssim: side must be >= 4");
    if (a.size() != static_cast<std::size_t>(side) * side || a.size() != b.size()) {
        throw ShapeError("ssim: inputs must both be side*side");
    }
    if (!(peak > 0.0)) throw std::invalid_argument("ssim: peak must be > 0");

    const int win = std::min(11, side);
    const double sigma = 1.5;

    // Separable Gaussian window, normalized to sum 1.
    std::vector<double> kernel1d(win);
    const double center = (win - 1) / 2.0;
    double ksum = 0.0;
    for (int i = 0; i < win; ++i) {
        const double d = i - center;
        kernel1d[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        ksum += kernel1d[i];
    }
    for (double& k : kernel1d) k /= ksum;

    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);

    double total = 0.0;
    int windows = 0;
    for (int r0 = 0; r0 + win <= side; ++r0) {
        for (int c0 = 0; c0 + win <= side; ++c0) {
            double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
            for (int r = 0; r < win; ++r) {
                for (int c = 0; c < win; ++c) {
                    const double w = kernel1d[r] * kernel1d[c];
                    const double va = a[static_cast<std::size_t>(r0 + r) * side + (c0 + c)];
                    const double vb = b[static_cast<std::size_t>(r0 + r) * side + (c0 + c)];
                    mu_a += w * va;
                    mu_b += w * vb;
                    aa += w * va * va;
                    bb += w * vb * vb;
                    ab += w * va * vb;
                }
            }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
            ++windows;
        }
    }
    return total / windows;
}

double trial_std(std::span<const Vec> outputs) {
    if (outputs.size() < 2) throw std::invalid_argument("trial_std: need at least two trials");
    const std::size_t dim = outputs[0].size();
    for (const Vec& v : outputs) {
        if (v.size() != dim) throw ShapeError("trial_std: trial dimension mismatch");
    }
    const double n = static_cast<double>(outputs.size());
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        double sum = 0.0;
        for (const Vec& v : outputs) sum += v[d];
        const double mu = sum / n;
        double ss = 0.0;
        for (const Vec& v : outputs) {
            const double diff = v[d] - mu;
            ss += diff * diff;
        }
        acc += std::sqrt(ss / (n - 1.0));
    }
    return acc / static_cast<double>(dim);
}

MomentDistance moment_distance(std::span<const Vec> samples_a, std::span<const Vec> samples_b) {
    if (samples_a.empty() || samples_b.empty()) {
        throw std::invalid_argument("moment_distance: empty sample set");
    }
    const std::size_t dim = samples_a[0].size();
    if (samples_b[0].size() != dim) throw ShapeError("moment_distance: dimension mismatch");

    auto mean_of = [dim](std::span<const Vec> s) {
        Vec mu(dim, 0.0);
        for (const Vec& v : s) {
            for (std::size_t d = 0; d < dim; ++d) mu[d] += v[d];
        }
        for (double& m : mu) m /= static_cast<double>(s.size());
        return mu;
    };
    auto cov_of = [dim](std::span<const Vec> s, const Vec& mu) {
        std::vector<double> cov(dim * dim, 0.0);
        const double denom = s.size() > 1 ? static_cast<double>(s.size() - 1)
                                          : 1.0;  // single sample: zero covariance
        for (const Vec& v : s) {
            for (std::size_t i = 0; i < dim; ++i) {
                const double di = v[i] - mu[i];
                for (std::size_t j = 0; j < dim; ++j) cov[i * dim + j] += di * (v[j] - mu[j]);
            }
        }
        for (double& c : cov) c /= denom;
        return cov;
    };

    const Vec mu_a = mean_of(samples_a);
    const Vec mu_b = mean_of(samples_b);
    const auto cov_a = cov_of(samples_a, mu_a);
    const auto cov_b = cov_of(samples_b, mu_b);

    MomentDistance out;
    double m = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double diff = mu_a[d] - mu_b[d];
        m += diff * diff;
    }
    out.mean_gap = std::sqrt(m);
    double c = 0.0;
    for (std::size_t i = 0; i < dim * dim; ++i) {
        const double diff = cov_a[i] - cov_b[i];
        c += diff * diff;
    }
    out.cov_gap = std::sqrt(c);
    return out;
}

std::string format_csv_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_metrics_csv(std::ostream& out, std::vector<MetricsRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
        if (a.sampler != b.sampler) return a.sampler < b.sampler;
        if (a.steps != b.steps) return a.steps < b.steps;
        return a.trial < b.trial;
    });
    out << "sampler,steps,trial,psnr_db,ssim,std,mean_gap,cov_gap\n";
    for (const MetricsRow& r : rows) {
        out << r.sampler << ',' << r.steps << ',' << r.trial << ',' << format_csv_value(r.psnr_db)
            << ',' << format_csv_value(r.ssim) << ',' << format_csv_value(r.std_dev) << ','
            << format_csv_value(r.mean_gap) << ',' << format_csv_value(r.cov_gap) << '\n';
    }
}

}  // namespace dabridge
