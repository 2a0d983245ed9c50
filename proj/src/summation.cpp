#include "cbias/summation.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cbias::sums {

bool CheckpointSeries::has_column(const std::string& name) const {
    return std::any_of(columns.begin(), columns.end(),
                       [&](const Column& c) { return c.name == name; });
}

const std::vector<double>& CheckpointSeries::column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name) return c.values;
    throw std::invalid_argument("no such column: " + name);
}

void CheckpointSeries::add_column(std::string name, std::vector<double> values) {
    if (values.size() != grid.points.size())
        throw std::invalid_argument("column " + name + " has " + std::to_string(values.size()) +
                                    " rows, grid has " + std::to_string(grid.points.size()));
    if (has_column(name)) throw std::invalid_argument("duplicate column: " + name);
    columns.push_back({std::move(name), std::move(values)});
}

PrimeClassifier all_primes_classifier() {
    return {{"all"}, [](u64) { return 0; }, {1.0}};
}

std::string class_column(const std::string& label) { return "class:" + label; }

SeriesAccumulator::SeriesAccumulator(PrimeClassifier classifier, double s, CheckpointGrid grid)
    : classifier_(std::move(classifier)), s_(s), grid_(std::move(grid)) {
    sums_.resize(classifier_.label_count() + 2);
    rows_.reserve(grid_.points.size());
}

void SeriesAccumulator::snapshot() {
    std::vector<double> row(sums_.size());
    for (std::size_t i = 0; i < sums_.size(); ++i) row[i] = sums_[i].result();
    rows_.push_back(std::move(row));
    ++next_;
}

void SeriesAccumulator::operator()(u64 p) {
    if (p <= last_) throw primes::ContractViolation("prime stream is not strictly ascending");
    last_ = p;
    while (next_ < grid_.points.size() && grid_.points[next_] < p) snapshot();
    const double w = prime_weight(p, s_);
    const int label = classifier_.classify(p);
    const std::size_t slot =
        label == kExcluded ? classifier_.label_count() : static_cast<std::size_t>(label);
    sums_[slot].add(w);
    sums_.back().add(w);
}

CheckpointSeries SeriesAccumulator::finish(u64 stream_limit) {
    if (!grid_.points.empty() && grid_.x_max > stream_limit)
        throw primes::ContractViolation("grid extends past the prime stream limit");
    while (next_ < grid_.points.size()) snapshot();

    CheckpointSeries out;
    out.grid = grid_;
    const std::size_t n = grid_.points.size();
    for (std::size_t k = 0; k < sums_.size(); ++k) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = rows_[i][k];
        std::string name = k < classifier_.label_count() ? class_column(classifier_.labels[k])
                           : k == classifier_.label_count() ? kExcludedColumn
                                                            : kTotalColumn;
        out.add_column(std::move(name), std::move(values));
    }
    out.metadata["s"] = s_ == 0.0 ? "0" : s_ == 0.5 ? "0.5" : s_ == 1.0 ? "1" : std::to_string(s_);
    return out;
}

AccumulatorState SeriesAccumulator::save_state() const {
    AccumulatorState st;
    for (const auto& s : sums_) {
        st.reals.push_back(s.value);
        st.reals.push_back(s.compensation);
        st.integers.push_back(s.count);
    }
    for (const auto& row : rows_) st.reals.insert(st.reals.end(), row.begin(), row.end());
    st.integers.push_back(next_);
    st.integers.push_back(last_);
    return st;
}

void SeriesAccumulator::load_state(const AccumulatorState& st) {
    const std::size_t k = sums_.size();
    if (st.integers.size() != k + 2) throw std::invalid_argument("accumulator state shape mismatch");
    const std::size_t rows = st.integers[k];
    if (st.reals.size() != 2 * k + rows * k) throw std::invalid_argument("accumulator state shape mismatch");
    for (std::size_t i = 0; i < k; ++i) {
        sums_[i].value = st.reals[2 * i];
        sums_[i].compensation = st.reals[2 * i + 1];
        sums_[i].count = st.integers[i];
    }
    rows_.clear();
    for (std::size_t r = 0; r < rows; ++r) {
        auto first = st.reals.begin() + static_cast<long>(2 * k + r * k);
        rows_.emplace_back(first, first + static_cast<long>(k));
    }
    next_ = rows;
    last_ = st.integers[k + 1];
}

CheckpointSeries accumulate_series(const PrimeClassifier& classifier, double s,
                                   const CheckpointGrid& grid, const primes::SieveConfig& config) {
    if (grid.x_max > config.limit)
        throw primes::ContractViolation("grid extends to " + std::to_string(grid.x_max) + " past the stream limit " +
                                        std::to_string(config.limit));
    SeriesAccumulator acc(classifier, s, grid);
    acc = primes::stream_primes(config, std::move(acc));
    return acc.finish(config.limit);
}

double scale_value(Scale scale, double x) {
    switch (scale) {
    case Scale::LogLog:
        if (!(x >= 16.0)) throw std::domain_error("log log x needs x >= 16, got " + std::to_string(x));
        return std::log(std::log(x));
    case Scale::LogN:
        if (!(x >= 1.0)) throw std::domain_error("log n needs n >= 1, got " + std::to_string(x));
        return std::log(x);
    }
    return 0.0;
}

const char* scale_name(Scale scale) { return scale == Scale::LogLog ? "log-log" : "log n"; }

CheckpointSeries residual_series(const CheckpointSeries& series, const std::vector<Term>& combo,
                                 double slope, Scale scale, const std::string& combo_name,
                                 const std::string& residual_name) {
    const std::size_t n = series.size();
    std::vector<double> sum(n, 0.0);
    for (const auto& term : combo) {
        const auto& col = series.column(term.column);
        for (std::size_t i = 0; i < n; ++i) sum[i] += term.coefficient * col[i];
    }
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = scale_value(scale, static_cast<double>(series.grid.points[i]));
        residual[i] = sum[i] - slope * sc;
    }
    CheckpointSeries out = series;
    if (!combo_name.empty() && combo_name != residual_name) out.add_column(combo_name, std::move(sum));
    out.add_column(residual_name, std::move(residual));
    return out;
}

LinearFit fit_slope(const CheckpointSeries& series, const std::string& column, u64 x_lo,
                    Scale scale, u64 x_hi) {
    const auto& values = series.column(column);
    const u64 floor = scale == Scale::LogLog ? std::max<u64>(x_lo, 16) : std::max<u64>(x_lo, 1);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const u64 x = series.grid.points[i];
        if (x < floor || x > x_hi) continue;
        xs.push_back(scale_value(scale, static_cast<double>(x)));
        ys.push_back(values[i]);
    }
    if (xs.size() < 8)
        throw std::invalid_argument("slope fit needs >= 8 checkpoints, have " + std::to_string(xs.size()));
    const auto n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("slope fit over a degenerate abscissa");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = xs.size();
    return fit;
}

double column_range(const CheckpointSeries& series, const std::string& column, u64 x_lo,
                    u64 x_hi) {
    const auto& values = series.column(column);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const u64 x = series.grid.points[i];
        if (x < x_lo || x > x_hi) continue;
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
    }
    if (hi < lo) throw std::invalid_argument("no checkpoints in range for " + column);
    return hi - lo;
}

CheckpointSeries mertens_residual(const CheckpointSeries& s1_series,
                                  const PrimeClassifier& classifier, std::size_t label) {
    if (label >= classifier.label_count()) throw std::invalid_argument("label out of range");
    const auto& name = classifier.labels[label];
    return residual_series(s1_series, {{class_column(name), 1.0}},
                           classifier.expected_density[label], Scale::LogLog, "",
                           "mertens_residual:" + name);
}

CheckpointSeries mertens_residual(const PrimeClassifier& classifier, std::size_t label,
                                  const CheckpointGrid& grid, const primes::SieveConfig& config) {
    return mertens_residual(accumulate_series(classifier, 1.0, grid, config), classifier, label);
}

DensityReport density_report(const CheckpointSeries& counts, const PrimeClassifier& classifier) {
    auto it = counts.metadata.find("s");
    if (it == counts.metadata.end() || it->second != "0")
        throw std::invalid_argument("density_report needs an s = 0 counting series");
    DensityReport report;
    report.grid = counts.grid;
    report.labels = classifier.labels;
    report.expected = classifier.expected_density;
    const auto& total = counts.column(kTotalColumn);
    for (const auto& label : classifier.labels) {
        const auto& c = counts.column(class_column(label));
        std::vector<std::optional<double>> r(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            if (total[i] > 0) r[i] = c[i] / total[i];
        report.ratios.push_back(std::move(r));
    }
    return report;
}

void RaceTracker::operator()(u64 p) {
    const u64 r = p % q_;
    if (r == b_) ++diff_;
    else if (r == a_) --diff_;
    else return;
    const int sign = (diff_ > 0) - (diff_ < 0);
    if (sign != sign_) {
        events_.push_back({p, diff_});
        sign_ = sign;
    }
}

}  // namespace cbias::sums
