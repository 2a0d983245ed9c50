#pragma once

/// @file summation.hpp
/// @brief Weighted prime sums over classes, residuals against c*loglog(x),
/// slope fits and density reports.

#include "cbias/primes.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cbias::sums {

using primes::CheckpointGrid;
using primes::u64;

/// Neumaier (carry-preserving) summation.
struct CompensatedSum {
    double value = 0.0;
    double compensation = 0.0;
    u64 count = 0;

    void add(double term) {
        const double t = value + term;
        if (std::fabs(value) >= std::fabs(term))
            compensation += (value - t) + term;
        else
            compensation += (term - t) + value;
        value = t;
        ++count;
    }
    double result() const { return value + compensation; }
};

/// p^{-s}, with the common exponents special-cased.
inline double prime_weight(u64 p, double s) {
    const auto x = static_cast<double>(p);
    if (s == 0.0) return 1.0;
    if (s == 0.5) return 1.0 / std::sqrt(x);
    if (s == 1.0) return 1.0 / x;
    return std::pow(x, -s);
}

struct Column {
    std::string name;
    std::vector<double> values;
};

/// Per-checkpoint columns over a grid. `x_label` names the abscissa in output
/// ("x" for prime bounds, "n" for polynomial degrees).
struct CheckpointSeries {
    CheckpointGrid grid;
    std::string x_label = "x";
    std::vector<Column> columns;
    std::map<std::string, std::string> metadata;

    bool has_column(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
    /// Appends a column; throws std::invalid_argument on a size mismatch or duplicate name.
    void add_column(std::string name, std::vector<double> values);
    std::size_t size() const { return grid.points.size(); }
};

inline constexpr int kExcluded = -1;

/// Map prime -> label index, or kExcluded for ramified primes.
struct PrimeClassifier {
    std::vector<std::string> labels;
    std::function<int(u64)> classify;
    std::vector<double> expected_density;

    std::size_t label_count() const { return labels.size(); }
};

/// Every prime in one class of density 1.
PrimeClassifier all_primes_classifier();

/// Column names produced by accumulate_series.
std::string class_column(const std::string& label);
inline const std::string kExcludedColumn = "excluded";
inline const std::string kTotalColumn = "total";

/// Snapshot of an accumulator, for resumable runs.
struct AccumulatorState {
    std::vector<double> reals;
    std::vector<u64> integers;
};

/// Streaming consumer behind accumulate_series. Feed primes in ascending order.
class SeriesAccumulator {
public:
    SeriesAccumulator(PrimeClassifier classifier, double s, CheckpointGrid grid);

    void operator()(u64 p);
    /// Closes every remaining checkpoint. Throws ContractViolation if the
    /// stream stopped short of grid.x_max.
    CheckpointSeries finish(u64 stream_limit);

    AccumulatorState save_state() const;
    void load_state(const AccumulatorState& state);

private:
    void snapshot();

    PrimeClassifier classifier_;
    double s_;
    CheckpointGrid grid_;
    std::vector<CompensatedSum> sums_;  // labels..., excluded, total
    std::vector<std::vector<double>> rows_;
    std::size_t next_ = 0;
    u64 last_ = 0;
};

/// Sum of p^{-s} per class at each checkpoint, streaming primes up to grid.x_max.
CheckpointSeries accumulate_series(const PrimeClassifier& classifier, double s,
                                   const CheckpointGrid& grid, const primes::SieveConfig& config);

enum class Scale { LogLog, LogN };

/// log log x (x >= 16) or log n (n >= 1); std::domain_error outside.
double scale_value(Scale scale, double x);
const char* scale_name(Scale scale);

struct Term {
    std::string column;
    double coefficient;
};

/// Adds `combo_name` = sum coefficient*column and `residual_name` = combo - slope*scale(x).
CheckpointSeries residual_series(const CheckpointSeries& series, const std::vector<Term>& combo,
                                 double slope, Scale scale, const std::string& combo_name,
                                 const std::string& residual_name);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

/// Unweighted least squares of `column` against scale(x), over checkpoints
/// x >= max(x_lo, 16) for log-log (x >= max(x_lo, 1) for log n). Needs >= 8 points.
LinearFit fit_slope(const CheckpointSeries& series, const std::string& column, u64 x_lo,
                    Scale scale = Scale::LogLog, u64 x_hi = ~u64{0});

inline LinearFit fit_loglog_slope(const CheckpointSeries& series, const std::string& column,
                                  u64 x_lo) {
    return fit_slope(series, column, x_lo, Scale::LogLog);
}

/// max - min of a column over checkpoints in [x_lo, x_hi].
double column_range(const CheckpointSeries& series, const std::string& column, u64 x_lo,
                    u64 x_hi);

/// Sum_{p<=x, class=label} 1/p - density*loglog x, from an s = 1 series.
CheckpointSeries mertens_residual(const CheckpointSeries& s1_series,
                                  const PrimeClassifier& classifier, std::size_t label);

CheckpointSeries mertens_residual(const PrimeClassifier& classifier, std::size_t label,
                                  const CheckpointGrid& grid, const primes::SieveConfig& config);

struct DensityReport {
    CheckpointGrid grid;
    std::vector<std::string> labels;
    std::vector<double> expected;
    /// ratios[label][checkpoint]; absent where no prime has been seen yet.
    std::vector<std::vector<std::optional<double>>> ratios;
};

/// count_label(x) / total(x) from an s = 0 series.
DensityReport density_report(const CheckpointSeries& counts, const PrimeClassifier& classifier);

/// One change in the sign of count(b) - count(a).
struct RaceEvent {
    u64 prime;
    long long difference;
};

/// Tracks pi(x;q,b) - pi(x;q,a) prime by prime and records every sign change
/// (including arrivals at zero).
class RaceTracker {
public:
    RaceTracker(u64 q, u64 a, u64 b) : q_(q), a_(a % q), b_(b % q) {}
    void operator()(u64 p);
    const std::vector<RaceEvent>& events() const { return events_; }
    long long difference() const { return diff_; }

private:
    u64 q_, a_, b_;
    long long diff_ = 0;
    int sign_ = 0;
    std::vector<RaceEvent> events_;
};

}  // namespace cbias::sums
