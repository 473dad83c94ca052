#include "pdsde/stats.hpp"

#include <algorithm>

namespace pdsde {

Summary summarize(std::span<const double> values) {
    Summary s;
    s.n = values.size();
    if (s.n == 0) return s;
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    s.mean = sum.value() / static_cast<double>(s.n);
    if (s.n > 1) {
        CompensatedSum sq;
        for (double v : values) sq.add((v - s.mean) * (v - s.mean));
        s.var = sq.value() / static_cast<double>(s.n - 1);
        s.se = std::sqrt(s.var / static_cast<double>(s.n));
    }
    return s;
}

Summary batch_means(std::span<const double> series, std::size_t n_batches) {
    Summary s = summarize(series);
    n_batches = std::min(n_batches, series.size());
    if (n_batches < 2) return s;
    const std::size_t len = series.size() / n_batches;
    std::vector<double> means;
    means.reserve(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        means.push_back(summarize(series.subspan(b * len, len)).mean);
    }
    const Summary m = summarize(means);
    s.se = m.se;
    return s;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    LinearFit fit;
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return fit;
    const Summary sx = summarize(x.first(n));
    const Summary sy = summarize(y.first(n));
    CompensatedSum sxy, sxx, syy;
    for (std::size_t i = 0; i < n; ++i) {
        sxy.add((x[i] - sx.mean) * (y[i] - sy.mean));
        sxx.add((x[i] - sx.mean) * (x[i] - sx.mean));
        syy.add((y[i] - sy.mean) * (y[i] - sy.mean));
    }
    if (sxx.value() == 0.0) return fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = sy.mean - fit.slope * sx.mean;
    fit.r_squared = syy.value() == 0.0 ? 1.0 : sxy.value() * sxy.value() / (sxx.value() * syy.value());
    return fit;
}

}  // namespace pdsde
