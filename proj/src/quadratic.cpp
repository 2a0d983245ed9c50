#include "cbias/quadratic.hpp"

#include "cbias/arith.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace cbias::quadratic {

using arith::mulmod;
using arith::powmod;

int kronecker(i64 a, i64 n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    int v = 0;
    while ((n & 1) == 0) {
        n >>= 1;
        ++v;
    }
    if (v > 0) {
        if ((a & 1) == 0) return 0;
        const i64 r8 = arith::mod_floor(a, 8);
        if ((v & 1) && (r8 == 3 || r8 == 5)) result = -result;
    }
    // Jacobi (a/n), n odd positive
    a = arith::mod_floor(a, n);
    while (a != 0) {
        while ((a & 1) == 0) {
            a >>= 1;
            const i64 r = n % 8;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        a %= n;
    }
    return n == 1 ? result : 0;
}

bool is_fundamental_discriminant(i64 D) {
    if (D == 0 || D == 1) return false;
    const i64 r = arith::mod_floor(D, 4);
    const auto m = static_cast<u64>(D < 0 ? -D : D);
    if (r == 1) return arith::is_squarefree(m);
    if (r != 0) return false;
    const i64 k = D / 4;
    const i64 k4 = arith::mod_floor(k, 4);
    return (k4 == 2 || k4 == 3) && arith::is_squarefree(static_cast<u64>(k < 0 ? -k : k));
}

unsigned prime_divisor_count(i64 D) {
    return static_cast<unsigned>(arith::factorize(static_cast<u64>(D < 0 ? -D : D)).size());
}

SplittingType splitting_type(i64 D, u64 p) {
    const int k = kronecker(D, static_cast<i64>(p));
    return k == 0 ? SplittingType::Ramified : k > 0 ? SplittingType::Split : SplittingType::Inert;
}

const char* splitting_name(SplittingType t) {
    switch (t) {
    case SplittingType::Split: return "split";
    case SplittingType::Inert: return "inert";
    default: return "ramified";
    }
}

bool BinaryQuadraticForm::is_reduced() const {
    const i64 ab = b < 0 ? -b : b;
    if (!(ab <= a && a <= c)) return false;
    if ((ab == a || a == c) && b < 0) return false;
    return true;
}

bool BinaryQuadraticForm::is_ambiguous() const { return b == 0 || a == b || a == c; }

std::string BinaryQuadraticForm::to_string() const {
    return std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c);
}

BinaryQuadraticForm reduce_form(BinaryQuadraticForm f) {
    if (f.discriminant() >= 0)
        throw std::invalid_argument("unsupported discriminant " + std::to_string(f.discriminant()) +
                                    ": only D < 0 is handled");
    if (f.a <= 0) throw std::invalid_argument("form must be positive definite (a > 0)");
    for (;;) {
        // x -> x + k y brings b into (-a, a]
        const i64 two_a = 2 * f.a;
        const i64 k = ((f.a - f.b) - arith::mod_floor(f.a - f.b, two_a)) / two_a;
        if (k != 0) {
            f.c += k * (f.a * k + f.b);
            f.b += two_a * k;
        }
        if (f.a > f.c) {
            std::swap(f.a, f.c);
            f.b = -f.b;
            continue;
        }
        if (f.a == f.c && f.b < 0) f.b = -f.b;
        return f;
    }
}

std::size_t ClassGroup::index_of(const BinaryQuadraticForm& f) const {
    const auto it = std::lower_bound(forms.begin(), forms.end(), f);
    if (it == forms.end() || *it != f) throw std::out_of_range("form not in class group: " + f.to_string());
    return static_cast<std::size_t>(it - forms.begin());
}

ClassGroup class_group(i64 D) {
    if (D >= 0) throw std::invalid_argument("unsupported discriminant " + std::to_string(D) + ": need D < 0");
    if (!is_fundamental_discriminant(D))
        throw std::invalid_argument("not a fundamental discriminant: " + std::to_string(D));
    ClassGroup g;
    g.D = D;
    const i64 amax = static_cast<i64>(std::sqrt(static_cast<double>(-D) / 3.0)) + 1;
    for (i64 a = 1; a <= amax; ++a) {
        for (i64 b = -a + 1; b <= a; ++b) {
            if (arith::mod_floor(b - D, 2) != 0) continue;
            const i64 num = b * b - D;
            if (num % (4 * a) != 0) continue;
            const BinaryQuadraticForm f{a, b, num / (4 * a)};
            if (!f.is_reduced()) continue;
            if (std::gcd(std::gcd(f.a, f.b < 0 ? -f.b : f.b), f.c) != 1) continue;
            g.forms.push_back(f);
        }
    }
    std::sort(g.forms.begin(), g.forms.end());
    g.principal = 0;  // (1, b0, c0) sorts first
    g.ambiguous = static_cast<std::size_t>(
        std::count_if(g.forms.begin(), g.forms.end(), [](const auto& f) { return f.is_ambiguous(); }));
    return g;
}

u64 sqrt_mod_prime(u64 a, u64 p) {
    a %= p;
    if (a == 0) return 0;
    if (p == 2) return a;
    if (powmod(a, (p - 1) / 2, p) != 1)
        throw primes::ContractViolation("sqrt_mod_prime: " + std::to_string(a) + " is not a square mod " +
                                        std::to_string(p));
    u64 s = 0, qq = p - 1;
    while ((qq & 1) == 0) {
        qq >>= 1;
        ++s;
    }
    u64 z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
    u64 m = s, c = powmod(z, qq, p), t = powmod(a, qq, p), r = powmod(a, (qq + 1) / 2, p);
    while (t != 1) {
        u64 i = 0, tt = t;
        while (tt != 1) {
            tt = mulmod(tt, tt, p);
            ++i;
        }
        u64 bb = c;
        for (u64 j = 0; j + 1 < m - i; ++j) bb = mulmod(bb, bb, p);
        m = i;
        c = mulmod(bb, bb, p);
        t = mulmod(t, c, p);
        r = mulmod(r, bb, p);
    }
    return r;
}

std::vector<PrimeIdeal> prime_ideal_classes(i64 D, u64 p) {
    if (D >= 0) throw std::invalid_argument("unsupported discriminant " + std::to_string(D) + ": need D < 0");
    const SplittingType type = splitting_type(D, p);
    if (type == SplittingType::Inert) {
        const i64 b0 = arith::mod_floor(D, 2);
        return {{BinaryQuadraticForm{1, b0, (b0 - D) / 4}, p * p}};
    }
    // b with b^2 = D (mod 4p)
    const auto pi = static_cast<i64>(p);
    i64 b = -1;
    if (p == 2) {
        for (i64 cand = 0; cand < 4; ++cand)
            if (arith::mod_floor(cand * cand - D, 8) == 0) {
                b = cand;
                break;
            }
    } else {
        b = static_cast<i64>(sqrt_mod_prime(static_cast<u64>(arith::mod_floor(D, pi)), p));
        if (arith::mod_floor(b - D, 2) != 0) b += pi;
    }
    if (b < 0 || arith::mod_floor(b * b - D, 4 * pi) != 0)
        throw primes::ContractViolation("no square root of D mod 4p for p = " + std::to_string(p));
    const i64 c = (b * b - D) / (4 * pi);
    const auto f = reduce_form({pi, b, c});
    if (type == SplittingType::Ramified) return {{f, p}};
    return {{f, p}, {reduce_form({pi, -b, c}), p}};
}

dirichlet::DirichletCharacter kronecker_character(i64 D) {
    const auto q = static_cast<u64>(D < 0 ? -D : D);
    for (auto& chi : dirichlet::characters(q)) {
        if (chi.nu() != 1) continue;
        bool match = true;
        for (u64 a = 1; a < q && match; ++a)
            if (chi.group().is_unit(a))
                match = chi(a).real() == static_cast<double>(kronecker(D, static_cast<i64>(a)));
        if (match) return chi;
    }
    throw std::invalid_argument("(D/.) is not a character mod |D| for D = " + std::to_string(D));
}

sums::PrimeClassifier splitting_classifier(i64 D) {
    sums::PrimeClassifier c;
    c.labels = {"split", "inert"};
    c.expected_density = {0.5, 0.5};
    c.classify = [D](u64 p) {
        const int k = kronecker(D, static_cast<i64>(p));
        return k == 0 ? sums::kExcluded : k > 0 ? 0 : 1;
    };
    return c;
}

sums::CheckpointSeries splitting_bias_series(i64 D, const primes::CheckpointGrid& grid,
                                             const primes::SieveConfig& config) {
    if (!is_fundamental_discriminant(D))
        throw std::invalid_argument("not a fundamental discriminant: " + std::to_string(D));
    auto chi = kronecker_character(D);
    dirichlet::l_half(chi);
    const double slope = 0.5 + *chi.m();

    auto series = sums::accumulate_series(splitting_classifier(D), 0.5, grid, config);
    const auto& split = series.column(sums::class_column("split"));
    const auto& inert = series.column(sums::class_column("inert"));
    const auto& ram = series.column(sums::kExcludedColumn);
    std::vector<double> nonsplit(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) nonsplit[i] = inert[i] + ram[i];
    std::vector<double> diff(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) diff[i] = nonsplit[i] - split[i];
    series.add_column("nonsplit", std::move(nonsplit));
    series.add_column("difference", std::move(diff));

    std::vector<double> pred(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        pred[i] = slope * sums::scale_value(sums::Scale::LogLog, static_cast<double>(series.grid.points[i]));
    series.add_column("prediction", std::move(pred));
    series = sums::residual_series(series, {{"difference", 1.0}}, slope, sums::Scale::LogLog, "", "residual");
    series.metadata["D"] = std::to_string(D);
    series.metadata["character"] = chi.label();
    series.metadata["slope"] = std::to_string(slope);
    return series;
}

namespace {

class IdealAccumulator {
public:
    IdealAccumulator(i64 D, const ClassGroup& cg, primes::CheckpointGrid grid)
        : D_(D), cg_(&cg), grid_(std::move(grid)), sums_(cg.h()), counts_(cg.h(), 0) {}

    void operator()(u64 p) {
        while (!inert_.empty() && inert_.front().second < p) {
            add(inert_.front().second, inert_.front().first);
            inert_.pop_front();
        }
        for (const auto& ideal : prime_ideal_classes(D_, p)) {
            const std::size_t k = cg_->index_of(ideal.form);
            if (ideal.norm == p) add(p, k);
            else if (ideal.norm <= grid_.x_max) inert_.push_back({k, ideal.norm});
        }
    }

    void finish() {
        for (const auto& [k, norm] : inert_) add(norm, k);
        inert_.clear();
        while (next_ < grid_.points.size()) snapshot();
    }

    std::vector<std::vector<double>> rows;
    std::vector<std::vector<u64>> count_rows;

private:
    void add(u64 norm, std::size_t k) {
        while (next_ < grid_.points.size() && grid_.points[next_] < norm) snapshot();
        sums_[k].add(1.0 / std::sqrt(static_cast<double>(norm)));
        ++counts_[k];
    }
    void snapshot() {
        std::vector<double> row(sums_.size());
        for (std::size_t i = 0; i < sums_.size(); ++i) row[i] = sums_[i].result();
        rows.push_back(std::move(row));
        count_rows.push_back(counts_);
        ++next_;
    }

    i64 D_;
    const ClassGroup* cg_;
    primes::CheckpointGrid grid_;
    std::vector<sums::CompensatedSum> sums_;
    std::vector<u64> counts_;
    std::deque<std::pair<std::size_t, u64>> inert_;  // (class, norm), norms ascending
    std::size_t next_ = 0;
};

}  // namespace

sums::CheckpointSeries principal_bias_series(i64 D, const primes::CheckpointGrid& grid,
                                             const primes::SieveConfig& config) {
    const ClassGroup cg = class_group(D);
    auto chi = kronecker_character(D);
    dirichlet::l_half(chi);

    primes::SieveConfig cfg = config;
    cfg.limit = std::max(cfg.limit, grid.x_max);
    auto acc = primes::stream_primes(cfg, IdealAccumulator(D, cg, grid));
    acc.finish();

    sums::CheckpointSeries out;
    out.grid = grid;
    const std::size_t n = grid.points.size();
    const std::size_t h = cg.h();
    std::vector<double> principal(n), nonprincipal(n, 0.0), combo(n);
    for (std::size_t k = 0; k < h; ++k) {
        std::vector<double> v(n), c(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = acc.rows[i][k];
            c[i] = static_cast<double>(acc.count_rows[i][k]);
            if (k == cg.principal) principal[i] = v[i];
            else nonprincipal[i] += v[i];
        }
        out.add_column("class:" + cg.forms[k].to_string(), std::move(v));
        out.add_column("count:" + cg.forms[k].to_string(), std::move(c));
    }
    for (std::size_t i = 0; i < n; ++i) combo[i] = nonprincipal[i] - static_cast<double>(h - 1) * principal[i];
    out.add_column("principal", std::move(principal));
    out.add_column("nonprincipal", std::move(nonprincipal));
    out.add_column("combo", std::move(combo));

    const double slope = (static_cast<double>(cg.ambiguous) - 1.0) / 2.0;
    std::vector<double> pred(n);
    for (std::size_t i = 0; i < n; ++i)
        pred[i] = slope * sums::scale_value(sums::Scale::LogLog, static_cast<double>(grid.points[i]));
    out.add_column("prediction", std::move(pred));
    out = sums::residual_series(out, {{"combo", 1.0}}, slope, sums::Scale::LogLog, "", "residual");
    out.metadata["D"] = std::to_string(D);
    out.metadata["h"] = std::to_string(h);
    out.metadata["cl_mod_squares"] = std::to_string(cg.ambiguous);
    std::string forms;
    for (const auto& f : cg.forms) forms += (forms.empty() ? "" : " ") + f.to_string();
    out.metadata["forms"] = forms;
    out.metadata["slope"] = std::to_string(slope);
    return out;
}

}  // namespace cbias::quadratic
