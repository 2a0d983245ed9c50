#include "cbias/dirichlet.hpp"

#include "cbias/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cbias::dirichlet {

using arith::mulmod;
using arith::powmod;

namespace {

u64 inverse_mod(u64 a, u64 m) {
    long long t = 0, new_t = 1;
    long long r = static_cast<long long>(m), new_r = static_cast<long long>(a % m);
    while (new_r != 0) {
        const long long quot = r / new_r;
        t = std::exchange(new_t, t - quot * new_t);
        r = std::exchange(new_r, r - quot * new_r);
    }
    if (r != 1) throw std::invalid_argument("not invertible");
    return static_cast<u64>(t < 0 ? t + static_cast<long long>(m) : t);
}

bool is_primitive_root(u64 g, u64 modulus, u64 phi) {
    if (std::gcd(g, modulus) != 1) return false;
    for (const auto& [r, k] : arith::factorize(phi))
        if (powmod(g, phi / r, modulus) == 1) return false;
    return true;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

UnitGroup::UnitGroup(u64 q) : q_(q) {
    if (q < 3) throw std::invalid_argument("unit group needs q >= 3, got " + std::to_string(q));
    for (const auto& [p, k] : arith::factorize(q)) {
        const u64 pk = arith::ipow(p, k);
        std::vector<Generator> local;
        if (p == 2) {
            if (k >= 2) local.push_back({pk - 1, 2});
            if (k >= 3) local.push_back({5, pk / 4});
        } else {
            const u64 phi = pk / p * (p - 1);
            u64 g = 2;
            while (!is_primitive_root(g, pk, phi)) ++g;
            local.push_back({g, phi});
        }
        const u64 rest = q / pk;
        for (const auto& gen : local) {
            // x = 1 (mod rest), x = g (mod pk)
            u64 x = gen.residue % pk;
            if (rest > 1) {
                const u64 t = mulmod((gen.residue + pk - 1) % pk, inverse_mod(rest % pk, pk), pk);
                x = (1 + rest * t) % q;
            }
            gens_.push_back({x, gen.order});
        }
    }
    for (const auto& g : gens_) {
        phi_ *= g.order;
        exponent_ = std::lcm(exponent_, g.order);
    }

    unit_.assign(q_, 0);
    const std::size_t r = gens_.size();
    dlog_.assign(q_ * std::max<std::size_t>(r, 1), 0);
    std::vector<u32> digits(r, 0);
    u64 value = 1 % q_;
    for (u64 step = 0; step < phi_; ++step) {
        unit_[value] = 1;
        std::copy(digits.begin(), digits.end(), dlog_.begin() + static_cast<long>(value * r));
        // odometer: each digit change multiplies by its generator
        for (std::size_t i = 0; i < r; ++i) {
            value = mulmod(value, gens_[i].residue, q_);
            if (++digits[i] < gens_[i].order) break;
            digits[i] = 0;
        }
    }
}

std::span<const u32> UnitGroup::dlog(u64 a) const {
    a %= q_;
    if (!unit_[a]) return {};
    const std::size_t r = gens_.size();
    if (r == 0) return {};
    return {dlog_.data() + a * r, r};
}

u64 UnitGroup::element(std::span<const u32> exponents) const {
    u64 x = 1 % q_;
    for (std::size_t i = 0; i < gens_.size() && i < exponents.size(); ++i)
        x = mulmod(x, powmod(gens_[i].residue, exponents[i], q_), q_);
    return x;
}

std::vector<u64> UnitGroup::units() const {
    std::vector<u64> out;
    out.reserve(phi_);
    for (u64 a = 1; a < q_; ++a)
        if (unit_[a]) out.push_back(a);
    return out;
}

std::shared_ptr<const UnitGroup> unit_group(u64 q) { return std::make_shared<const UnitGroup>(q); }

cplx root_of_unity(u64 k, u64 n) {
    k %= n;
    if ((4 * k) % n == 0) {
        switch ((4 * k) / n) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
        }
    }
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

DirichletCharacter::DirichletCharacter(std::shared_ptr<const UnitGroup> group,
                                       std::vector<u32> exponents)
    : group_(std::move(group)), exponents_(std::move(exponents)) {
    const auto& gens = group_->generators();
    if (exponents_.size() != gens.size())
        throw std::invalid_argument("character needs one exponent per generator");
    for (std::size_t i = 0; i < gens.size(); ++i) {
        if (exponents_[i] >= gens[i].order)
            throw std::invalid_argument("character exponent out of range");
        if (exponents_[i] != 0) principal_ = false;
        if ((2 * exponents_[i]) % gens[i].order != 0) real_ = false;
    }
}

std::optional<u64> DirichletCharacter::value_index(u64 n) const {
    if (!group_->is_unit(n)) return std::nullopt;
    const auto d = group_->dlog(n);
    const auto& gens = group_->generators();
    const u64 big = group_->exponent();
    u64 k = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        k = (k + static_cast<u64>(exponents_[i]) * d[i] % gens[i].order * (big / gens[i].order)) % big;
    return k;
}

cplx DirichletCharacter::operator()(u64 n) const {
    const auto k = value_index(n);
    return k ? root_of_unity(*k, group_->exponent()) : cplx{0.0, 0.0};
}

std::string DirichletCharacter::label() const {
    std::string s = std::to_string(modulus()) + ":";
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(exponents_[i]);
    }
    return s;
}

u64 DirichletCharacter::conductor() const {
    const u64 q = modulus();
    for (u64 d = 1; d <= q; ++d) {
        if (q % d) continue;
        bool induced = true;
        for (u64 a = 1; a < q && induced; a += d)
            if (group_->is_unit(a) && *value_index(a) != 0) induced = false;
        if (induced) return d;
    }
    return q;
}

std::vector<DirichletCharacter> characters(u64 q) {
    auto g = unit_group(q);
    const auto& gens = g->generators();
    std::vector<DirichletCharacter> out;
    out.reserve(g->phi());
    std::vector<u32> e(gens.size(), 0);
    for (;;) {
        out.emplace_back(g, e);
        // lexicographic: last exponent varies fastest
        std::size_t i = gens.size();
        while (i > 0) {
            --i;
            if (++e[i] < gens[i].order) break;
            e[i] = 0;
            if (i == 0) return out;
        }
        if (gens.empty()) return out;
    }
}

DirichletCharacter parse_character(const std::string& label) {
    const auto colon = label.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("character label needs 'q:e1,...': " + label);
    u64 q = 0;
    try {
        q = std::stoull(label.substr(0, colon));
    } catch (const std::exception&) {
        throw std::invalid_argument("bad modulus in character label: " + label);
    }
    auto g = unit_group(q);
    std::vector<u32> e;
    std::stringstream ss(label.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            e.push_back(static_cast<u32>(std::stoul(item)));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad exponent in character label: " + label);
        }
    }
    return DirichletCharacter(g, e);
}

bool is_quadratic_residue(u64 a, u64 q) {
    const UnitGroup g(q);
    if (!g.is_unit(a))
        throw std::invalid_argument("is_quadratic_residue needs gcd(a, q) = 1");
    const auto d = g.dlog(a);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (g.generators()[i].order % 2 == 0 && d[i] % 2 != 0) return false;
    return true;
}

unsigned t_formula(u64 q) {
    unsigned t = 0, v2 = 0;
    for (const auto& [p, k] : arith::factorize(q)) {
        ++t;
        if (p == 2) v2 = k;
    }
    if (v2 == 1) return t - 1;
    if (v2 >= 3) return t + 1;
    return t;
}

unsigned t_from_group(const UnitGroup& g) {
    unsigned t = 0;
    for (const auto& gen : g.generators())
        if (gen.order % 2 == 0) ++t;
    return t;
}

unsigned t_of_q(u64 q) {
    const unsigned a = t_formula(q);
    const unsigned b = t_from_group(UnitGroup(q));
    if (a != b)
        throw std::logic_error("t(q) case formula disagrees with unit group for q = " + std::to_string(q));
    return a;
}

std::vector<std::pair<u64, SlopePrediction>> predict_all_class_slopes(u64 q, bool certify_central) {
    const auto chars = characters(q);
    const auto& group = chars.front().group();
    const auto units = group.units();
    if (certify_central) {
        std::vector<double> zeta(units.size());
        for (std::size_t i = 0; i < units.size(); ++i)
            zeta[i] = hurwitz_zeta(0.5, static_cast<double>(units[i]) / static_cast<double>(q));
        for (const auto& chi : chars) {
            if (chi.is_principal()) continue;
            cplx sum = 0;
            for (std::size_t i = 0; i < units.size(); ++i) sum += chi(units[i]) * zeta[i];
            const cplx value = sum / std::sqrt(static_cast<double>(q));
            if (std::abs(value) <= kCentralZeroThreshold)
                throw CentralZeroError("L(1/2, chi) vanishes numerically for chi = " + chi.label() +
                                       "; m(sigma) unknown");
        }
    }
    const unsigned t = t_of_q(q);
    std::vector<std::pair<u64, SlopePrediction>> out;
    for (u64 a : units) {
        double M = 0.0;
        for (const auto& chi : chars)
            if (chi.nu() == 1) M += 0.5 * chi(a).real();
        const bool residue = is_quadratic_residue(a, q);
        const double closed = residue ? (std::ldexp(1.0, static_cast<int>(t)) - 1.0) / 2.0 : -0.5;
        if (std::fabs(M - closed) > 1e-12)
            throw std::logic_error("character sum for M disagrees with the closed form");
        out.push_back({a, {M, 0.0, M}});
    }
    return out;
}

SlopePrediction predict_class_slope(u64 q, u64 a) {
    if (q < 3) throw std::invalid_argument("q must be >= 3");
    if (std::gcd(a % q, q) != 1) throw std::invalid_argument("predict_class_slope needs gcd(a, q) = 1");
    for (const auto& [unit, pred] : predict_all_class_slopes(q))
        if (unit == a % q) return pred;
    throw std::logic_error("unit not found");
}

double predict_pair_slope(u64 q, u64 a, u64 b) {
    if (q < 3) throw std::invalid_argument("q must be >= 3");
    if (std::gcd(a % q, q) != 1 || std::gcd(b % q, q) != 1)
        throw std::invalid_argument("predict_pair_slope needs units a, b");
    const auto all = predict_all_class_slopes(q);
    double ma = 0, mb = 0;
    for (const auto& [unit, pred] : all) {
        if (unit == a % q) ma = pred.total;
        if (unit == b % q) mb = pred.total;
    }
    return (ma - mb) / static_cast<double>(all.size());
}

double hurwitz_zeta(double s, double a) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("hurwitz_zeta needs 0 < s < 1");
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("hurwitz_zeta needs 0 < a <= 1");
    constexpr int N = 50;
    // B_2 .. B_16
    constexpr long double bernoulli[] = {1.0L / 6,     -1.0L / 30,   1.0L / 42,  -1.0L / 30,
                                         5.0L / 66,    -691.0L / 2730, 7.0L / 6, -3617.0L / 510};
    const long double ls = s, la = a;
    long double sum = 0;
    for (int n = 0; n < N; ++n) sum += std::pow(n + la, -ls);
    const long double x = N + la;
    sum += std::pow(x, 1 - ls) / (ls - 1);
    sum += std::pow(x, -ls) / 2;
    long double factorial = 1;  // (2k)!
    long double rising = ls;    // s (s+1) ... (s+2k-2)
    for (int k = 1; k <= 8; ++k) {
        factorial *= static_cast<long double>((2 * k - 1) * (2 * k));
        if (k > 1) rising *= (ls + 2 * k - 3) * (ls + 2 * k - 2);
        sum += bernoulli[k - 1] / factorial * rising * std::pow(x, -ls - 2 * k + 1);
    }
    return static_cast<double>(sum);
}

cplx central_value(const DirichletCharacter& chi) {
    if (chi.is_principal()) throw std::invalid_argument("central_value needs a nonprincipal character");
    const u64 q = chi.modulus();
    cplx sum = 0;
    for (u64 a = 1; a < q; ++a) {
        if (!chi.group().is_unit(a)) continue;
        sum += chi(a) * hurwitz_zeta(0.5, static_cast<double>(a) / static_cast<double>(q));
    }
    return sum / std::sqrt(static_cast<double>(q));
}

cplx l_half(DirichletCharacter& chi) {
    const cplx v = central_value(chi);
    if (std::abs(v) <= kCentralZeroThreshold)
        throw CentralZeroError("L(1/2, chi) vanishes numerically for chi = " + chi.label() +
                               "; cannot assume m = 0");
    chi.set_m(0);
    return v;
}

sums::PrimeClassifier residue_classifier(u64 q) {
    auto g = unit_group(q);
    auto index = std::make_shared<std::vector<int>>(q, sums::kExcluded);
    sums::PrimeClassifier c;
    for (u64 a : g->units()) {
        (*index)[a] = static_cast<int>(c.labels.size());
        c.labels.push_back(std::to_string(a));
        c.expected_density.push_back(1.0 / static_cast<double>(g->phi()));
    }
    c.classify = [index, q](u64 p) { return (*index)[p % q]; };
    return c;
}

namespace {

std::vector<u64> close_subgroup(const UnitGroup& g, const std::vector<u64>& gens) {
    const u64 q = g.modulus();
    std::vector<char> in(q, 0);
    std::vector<u64> elems{1 % q};
    in[1 % q] = 1;
    for (u64 h : gens) {
        h %= q;
        if (!g.is_unit(h)) throw std::invalid_argument("subgroup element is not a unit: " + std::to_string(h));
    }
    for (std::size_t i = 0; i < elems.size(); ++i) {
        for (u64 h : gens) {
            const u64 x = mulmod(elems[i], h % q, q);
            if (!in[x]) {
                in[x] = 1;
                elems.push_back(x);
            }
        }
    }
    std::sort(elems.begin(), elems.end());
    return elems;
}

// coset index of each residue (kExcluded for non-units), and coset labels
std::pair<std::vector<int>, std::vector<u64>> coset_table(const UnitGroup& g,
                                                          const std::vector<u64>& h) {
    const u64 q = g.modulus();
    std::vector<int> idx(q, sums::kExcluded);
    std::vector<u64> reps;
    for (u64 a : g.units()) {
        if (idx[a] != sums::kExcluded) continue;
        const int label = static_cast<int>(reps.size());
        reps.push_back(a);
        for (u64 x : h) idx[mulmod(a, x, q)] = label;
    }
    return {idx, reps};
}

}  // namespace

sums::PrimeClassifier coset_classifier(u64 q, const std::vector<u64>& subgroup) {
    const UnitGroup g(q);
    const auto h = close_subgroup(g, subgroup);
    auto [idx, reps] = coset_table(g, h);
    auto index = std::make_shared<std::vector<int>>(std::move(idx));
    sums::PrimeClassifier c;
    for (u64 r : reps) {
        c.labels.push_back(std::to_string(r));
        c.expected_density.push_back(1.0 / static_cast<double>(reps.size()));
    }
    c.classify = [index, q](u64 p) { return (*index)[p % q]; };
    return c;
}

std::vector<double> coset_slopes(u64 q, const std::vector<u64>& subgroup) {
    const UnitGroup g(q);
    const auto h = close_subgroup(g, subgroup);
    const auto [idx, reps] = coset_table(g, h);
    std::vector<char> square(reps.size(), 0);
    for (u64 y : g.units()) square[static_cast<std::size_t>(idx[mulmod(y, y, q)])] = 1;
    const auto squares = static_cast<double>(std::count(square.begin(), square.end(), 1));
    const double quotient = static_cast<double>(reps.size()) / squares;  // |G'/G'^2|
    std::vector<double> out;
    for (std::size_t i = 0; i < reps.size(); ++i)
        out.push_back(square[i] ? (quotient - 1.0) / 2.0 : -0.5);
    return out;
}

// ---- Euler products -------------------------------------------------------

namespace {
constexpr std::size_t kSlots = 8;  // log product, k=1, k=2, k>=3 (re, im)
}

EulerProductAccumulator::EulerProductAccumulator(DirichletCharacter chi, primes::CheckpointGrid grid)
    : chi_(std::move(chi)), grid_(std::move(grid)), sums_(kSlots) {
    const u64 n = chi_.root_order();
    roots_.reserve(n);
    for (u64 k = 0; k < n; ++k) roots_.push_back(root_of_unity(k, n));
}

void EulerProductAccumulator::snapshot() {
    std::vector<double> row(kSlots);
    for (std::size_t i = 0; i < kSlots; ++i) row[i] = sums_[i].result();
    rows_.push_back(std::move(row));
    ++next_;
}

void EulerProductAccumulator::operator()(u64 p) {
    if (p <= last_) throw primes::ContractViolation("prime stream is not strictly ascending");
    last_ = p;
    while (next_ < grid_.points.size() && grid_.points[next_] < p) snapshot();
    const auto k = chi_.value_index(p);
    if (!k) return;
    const u64 n = roots_.size();
    const double r = 1.0 / std::sqrt(static_cast<double>(p));
    const cplx z = roots_[*k] * r;
    // -log(1 - z), real part via log1p
    sums_[0].add(-0.5 * std::log1p(-2.0 * z.real() + std::norm(z)));
    sums_[1].add(-std::atan2(-z.imag(), 1.0 - z.real()));
    sums_[2].add(z.real());
    sums_[3].add(z.imag());
    const cplx z2 = roots_[(2 * *k) % n] * (r * r / 2.0);
    sums_[4].add(z2.real());
    sums_[5].add(z2.imag());
    cplx tail = 0;
    double mag = r * r;
    for (int j = 3; j <= kLogExpansionCutoff; ++j) {
        mag *= r;
        const double term = mag / j;
        if (term < 1e-300 || term < 1e-20 * std::abs(tail) * 1e-2) break;
        tail += roots_[(static_cast<u64>(j) * *k) % n] * term;
    }
    sums_[6].add(tail.real());
    sums_[7].add(tail.imag());
}

sums::CheckpointSeries EulerProductAccumulator::finish(u64 stream_limit) {
    if (!grid_.points.empty() && grid_.x_max > stream_limit)
        throw primes::ContractViolation("grid extends past the prime stream limit");
    while (next_ < grid_.points.size()) snapshot();
    sums::CheckpointSeries out;
    out.grid = grid_;
    const std::size_t n = grid_.points.size();
    auto col = [&](std::size_t k) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = rows_[i][k];
        return v;
    };
    std::vector<double> pre(n), pim(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx prod = std::exp(cplx(rows_[i][0], rows_[i][1]));
        pre[i] = prod.real();
        pim[i] = prod.imag();
    }
    out.add_column("product_re", std::move(pre));
    out.add_column("product_im", std::move(pim));
    out.add_column("log_product_re", col(0));
    out.add_column("log_product_im", col(1));
    out.add_column("sum_k1_re", col(2));
    out.add_column("sum_k1_im", col(3));
    out.add_column("sum_k2_re", col(4));
    out.add_column("sum_k2_im", col(5));
    out.add_column("sum_k3plus_re", col(6));
    out.add_column("sum_k3plus_im", col(7));
    out.metadata["character"] = chi_.label();
    out.metadata["nu"] = std::to_string(chi_.nu());
    return out;
}

sums::AccumulatorState EulerProductAccumulator::save_state() const {
    sums::AccumulatorState st;
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

void EulerProductAccumulator::load_state(const sums::AccumulatorState& st) {
    if (st.integers.size() != kSlots + 2) throw std::invalid_argument("accumulator state shape mismatch");
    const std::size_t rows = st.integers[kSlots];
    if (st.reals.size() != 2 * kSlots + rows * kSlots)
        throw std::invalid_argument("accumulator state shape mismatch");
    for (std::size_t i = 0; i < kSlots; ++i) {
        sums_[i].value = st.reals[2 * i];
        sums_[i].compensation = st.reals[2 * i + 1];
        sums_[i].count = st.integers[i];
    }
    rows_.clear();
    for (std::size_t r = 0; r < rows; ++r) {
        auto first = st.reals.begin() + static_cast<long>(2 * kSlots + r * kSlots);
        rows_.emplace_back(first, first + static_cast<long>(kSlots));
    }
    next_ = rows;
    last_ = st.integers[kSlots + 1];
}

sums::CheckpointSeries partial_euler_product(DirichletCharacter chi,
                                             const primes::CheckpointGrid& grid,
                                             const primes::SieveConfig& config) {
    const cplx lval = l_half(chi);
    const cplx target = lval * (chi.nu() ? std::numbers::sqrt2 : 1.0);
    primes::SieveConfig cfg = config;
    cfg.limit = std::max(cfg.limit, grid.x_max);
    EulerProductAccumulator acc(chi, grid);
    acc = primes::stream_primes(cfg, std::move(acc));
    auto out = acc.finish(cfg.limit);
    out.add_column("target_re", std::vector<double>(out.size(), target.real()));
    out.add_column("target_im", std::vector<double>(out.size(), target.imag()));
    out.metadata["m"] = std::to_string(*chi.m());
    out.metadata["l_half_re"] = format_double(lval.real());
    out.metadata["l_half_im"] = format_double(lval.imag());
    return out;
}

sums::CheckpointSeries drh_residual(const sums::CheckpointSeries& euler_series,
                                    const DirichletCharacter& chi) {
    int m = 0;
    if (chi.m()) m = *chi.m();
    else if (auto it = euler_series.metadata.find("m"); it != euler_series.metadata.end())
        m = std::stoi(it->second);
    else
        throw std::logic_error("drh_residual needs the central order m (run l_half first)");
    const double slope = -(chi.nu() / 2.0 + m);  // sum chi(p)/sqrt p ~ -(nu/2 + m) loglog x
    auto out = sums::residual_series(euler_series, {{"sum_k1_re", 1.0}}, slope, sums::Scale::LogLog,
                                     "", "residual_re");
    out.add_column("residual_im", euler_series.column("sum_k1_im"));
    return out;
}

sums::CheckpointSeries drh_residual(DirichletCharacter chi, const primes::CheckpointGrid& grid,
                                    const primes::SieveConfig& config) {
    auto series = partial_euler_product(chi, grid, config);
    return drh_residual(series, chi);
}

}  // namespace cbias::dirichlet
