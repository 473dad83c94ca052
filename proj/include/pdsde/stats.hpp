#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pdsde {

// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct Summary {
    double mean = 0.0;
    double var = 0.0;  // unbiased sample variance
    double se = 0.0;   // standard error of the mean
    std::size_t n = 0;
};

// Two-pass mean/variance over values in index order (order fixed, so the
// result does not depend on how the values were produced in parallel).
Summary summarize(std::span<const double> values);

// Batch-means standard error for a correlated series.
Summary batch_means(std::span<const double> series, std::size_t n_batches = 20);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace pdsde
