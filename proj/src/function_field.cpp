#include "cbias/function_field.hpp"

#include "cbias/arith.hpp"
#include "cbias/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cbias::ff {

namespace {

u32 inv_mod(u32 a, u32 q) { return static_cast<u32>(arith::powmod(a, q - 2, q)); }

void check_same_field(const PolyFq& a, const PolyFq& b) {
    if (a.field() != b.field())
        throw std::invalid_argument("polynomials over different fields: F_" + std::to_string(a.field()) +
                                    " vs F_" + std::to_string(b.field()));
}

// q^k with a cap; returns 0 past the cap
u64 checked_pow(u64 q, unsigned k, u64 cap) {
    u64 r = 1;
    for (unsigned i = 0; i < k; ++i) {
        if (r > cap / q) return 0;
        r *= q;
    }
    return r;
}

}  // namespace

PolyFq::PolyFq(u32 q, std::vector<u32> coeffs) : q_(q), c_(std::move(coeffs)) {
    if (!arith::is_prime_td(q)) throw std::invalid_argument("field size must be prime, got " + std::to_string(q));
    for (auto& x : c_) x %= q_;
    trim();
}

void PolyFq::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

PolyFq PolyFq::monomial(u32 q, unsigned degree, u32 coeff) {
    std::vector<u32> c(degree + 1, 0);
    c[degree] = coeff;
    return PolyFq(q, std::move(c));
}

PolyFq PolyFq::from_index(u32 q, u64 index) {
    std::vector<u32> c;
    while (index) {
        c.push_back(static_cast<u32>(index % q));
        index /= q;
    }
    return PolyFq(q, std::move(c));
}

PolyFq PolyFq::parse(u32 q, const std::string& text) {
    std::istringstream in(text);
    std::vector<u32> c;
    long long v;
    while (in >> v) {
        if (v < 0 || v >= static_cast<long long>(q))
            throw std::invalid_argument("coefficient out of range in \"" + text + "\"");
        c.push_back(static_cast<u32>(v));
    }
    if (!in.eof()) throw std::invalid_argument("malformed polynomial \"" + text + "\"");
    return PolyFq(q, std::move(c));
}

u64 PolyFq::index() const {
    u64 idx = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) idx = idx * q_ + *it;
    return idx;
}

std::string PolyFq::to_string() const {
    if (c_.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(c_[i]);
    }
    return s;
}

std::string PolyFq::pretty() const {
    if (c_.empty()) return "0";
    std::string s;
    for (int k = degree(); k >= 0; --k) {
        const u32 c = c_[static_cast<std::size_t>(k)];
        if (c == 0) continue;
        if (!s.empty()) s += '+';
        if (k == 0) {
            s += std::to_string(c);
            continue;
        }
        if (c != 1) s += std::to_string(c);
        s += 'T';
        if (k > 1) s += '^' + std::to_string(k);
    }
    return s;
}

PolyFq operator+(const PolyFq& a, const PolyFq& b) {
    check_same_field(a, b);
    std::vector<u32> c(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (a.coeff(i) + b.coeff(i)) % a.q_;
    return PolyFq(a.q_, std::move(c));
}

PolyFq operator-(const PolyFq& a, const PolyFq& b) {
    check_same_field(a, b);
    std::vector<u32> c(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (a.coeff(i) + a.q_ - b.coeff(i)) % a.q_;
    return PolyFq(a.q_, std::move(c));
}

PolyFq operator*(const PolyFq& a, const PolyFq& b) {
    check_same_field(a, b);
    if (a.is_zero() || b.is_zero()) return PolyFq(a.q_);
    std::vector<u64> acc(a.c_.size() + b.c_.size() - 1, 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) acc[i + j] = (acc[i + j] + u64{a.c_[i]} * b.c_[j]) % a.q_;
    return PolyFq(a.q_, std::vector<u32>(acc.begin(), acc.end()));
}

std::pair<PolyFq, PolyFq> divmod(const PolyFq& a, const PolyFq& b) {
    check_same_field(a, b);
    if (b.is_zero()) throw std::invalid_argument("polynomial division by zero");
    const u32 q = a.field();
    std::vector<u32> r = a.coeffs();
    const int db = b.degree();
    if (a.degree() < db) return {PolyFq(q), a};
    std::vector<u32> quot(static_cast<std::size_t>(a.degree() - db + 1), 0);
    const u32 inv = inv_mod(b.coeffs().back(), q);
    for (int k = a.degree(); k >= db; --k) {
        const u32 lead = r[static_cast<std::size_t>(k)];
        if (lead == 0) continue;
        const u32 f = static_cast<u32>(u64{lead} * inv % q);
        quot[static_cast<std::size_t>(k - db)] = f;
        for (int j = 0; j <= db; ++j) {
            auto& x = r[static_cast<std::size_t>(k - db + j)];
            x = static_cast<u32>((x + q - u64{f} * b.coeffs()[static_cast<std::size_t>(j)] % q) % q);
        }
    }
    return {PolyFq(q, std::move(quot)), PolyFq(q, std::move(r))};
}

PolyFq operator%(const PolyFq& a, const PolyFq& b) { return divmod(a, b).second; }

PolyFq powmod(const PolyFq& base, u64 exp, const PolyFq& modulus) {
    PolyFq r = PolyFq(base.field(), {1}) % modulus;
    PolyFq b = base % modulus;
    while (exp) {
        if (exp & 1) r = (r * b) % modulus;
        b = (b * b) % modulus;
        exp >>= 1;
    }
    return r;
}

PolyFq gcd(PolyFq a, PolyFq b) {
    check_same_field(a, b);
    while (!b.is_zero()) {
        PolyFq r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    if (a.is_zero()) return a;
    const u32 q = a.field();
    const u32 inv = inv_mod(a.coeffs().back(), q);
    std::vector<u32> c = a.coeffs();
    for (auto& x : c) x = static_cast<u32>(u64{x} * inv % q);
    return PolyFq(q, std::move(c));
}

u64 irreducible_count(u32 q, unsigned d) {
    if (d == 0) return 0;
    arith::i128 sum = 0;
    for (unsigned e = 1; e <= d; ++e) {
        if (d % e) continue;
        int mu = 1;
        for (const auto& [p, k] : arith::factorize(e)) {
            if (k > 1) mu = 0;
            else mu = -mu;
        }
        if (mu == 0) continue;
        arith::i128 pw = 1;
        for (unsigned i = 0; i < d / e; ++i) pw *= q;
        sum += mu * pw;
    }
    return static_cast<u64>(sum / d);
}

void for_each_irreducible(u32 q, unsigned max_deg, const std::function<void(const PolyFq&)>& fn) {
    if (!arith::is_prime_td(q)) throw std::invalid_argument("field size must be prime, got " + std::to_string(q));
    if (max_deg == 0) return;
    if (checked_pow(q, max_deg, kEnumerationBudget) == 0)
        throw std::invalid_argument("enumeration budget exceeded: " + std::to_string(q) + "^" +
                                    std::to_string(max_deg) + " > 2^32");
    std::vector<u64> qpow(max_deg + 1, 1);
    for (unsigned k = 1; k <= max_deg; ++k) qpow[k] = qpow[k - 1] * q;

    // irreducibles of degree <= max_deg/2, kept for sieving
    std::vector<std::vector<std::vector<u32>>> kept(max_deg / 2 + 1);

    for (unsigned d = 1; d <= max_deg; ++d) {
        const u64 size = qpow[d];
        std::vector<u64> composite((size + 63) / 64, 0);
        std::vector<u32> prod(d + 1);
        for (unsigned i = 1; 2 * i <= d; ++i) {
            const unsigned j = d - i;
            for (const auto& f : kept[i]) {
                // g = T^j, then walk the lower coefficients of g as a base-q odometer;
                // bumping digit k of g adds f * T^k to the product
                std::fill(prod.begin(), prod.end(), 0);
                u64 idx = 0;
                for (unsigned t = 0; t <= i; ++t) {
                    prod[j + t] = f[t];
                    if (j + t < d) idx += f[t] * qpow[j + t];
                }
                std::vector<u32> digits(j, 0);
                for (;;) {
                    composite[idx >> 6] |= u64{1} << (idx & 63);
                    unsigned k = 0;
                    for (; k < j; ++k) {
                        for (unsigned t = 0; t <= i; ++t) {
                            u32& c = prod[k + t];
                            const u32 nc = (c + f[t]) % q;
                            idx = idx - c * qpow[k + t] + nc * qpow[k + t];
                            c = nc;
                        }
                        if (++digits[k] < q) break;
                        digits[k] = 0;
                    }
                    if (k == j) break;
                }
            }
        }
        for (u64 idx = 0; idx < size; ++idx) {
            if (composite[idx >> 6] >> (idx & 63) & 1) continue;
            std::vector<u32> c(d + 1);
            u64 v = idx;
            for (unsigned k = 0; k < d; ++k) {
                c[k] = static_cast<u32>(v % q);
                v /= q;
            }
            c[d] = 1;
            if (2 * d <= max_deg) kept[d].push_back(c);
            fn(PolyFq(q, std::move(c)));
        }
    }
}

std::vector<PolyFq> enumerate_irreducibles(u32 q, unsigned max_deg) {
    std::vector<PolyFq> out;
    for_each_irreducible(q, max_deg, [&](const PolyFq& f) { out.push_back(f); });
    return out;
}

// ---- unit group ------------------------------------------------------------

UnitClassTable::UnitClassTable(u32 q, const PolyFq& M) : q_(q), M_(M) {
    if (M.field() != q) throw std::invalid_argument("modulus is over a different field");
    if (M.degree() < 1) throw std::invalid_argument("modulus must have degree >= 1");
    residues_ = checked_pow(q, static_cast<unsigned>(M.degree()), 100 * kUnitBudget);
    if (residues_ == 0) throw std::invalid_argument("unit budget exceeded: residue ring too large");

    pos_.assign(residues_, -1);
    for (u64 r = 1; r < residues_; ++r) {
        if (gcd(PolyFq::from_index(q, r), M_).degree() == 0) {
            pos_[r] = static_cast<long>(units_.size());
            units_.push_back(r);
        }
    }
    const u64 phi = units_.size();
    if (phi > kUnitBudget)
        throw std::invalid_argument("unit budget exceeded: Phi = " + std::to_string(phi) + " > 100000");

    auto pw = [&](u64 x, u64 e) {
        u64 r = 1, b = x;
        while (e) {
            if (e & 1) r = mul(r, b);
            b = mul(b, b);
            e >>= 1;
        }
        return r;
    };

    // basis of each Sylow subgroup: repeatedly take an element of largest order
    // modulo the span so far, then correct it so its powers avoid the span
    for (const auto& [ell, e] : arith::factorize(phi)) {
        const u64 sylow_order = arith::ipow(ell, e);
        const u64 cofactor = phi / sylow_order;
        std::vector<char> in_s(residues_, 0);
        std::vector<u64> S;
        for (u64 x : units_) {
            const u64 y = pw(x, cofactor);
            if (!in_s[y]) {
                in_s[y] = 1;
                S.push_back(y);
            }
        }
        std::sort(S.begin(), S.end());
        std::vector<long> h_pos(residues_, -1);
        std::vector<u64> H{1};
        std::vector<std::vector<u32>> H_coords{{}};
        h_pos[1] = 0;
        std::vector<FFGenerator> local;
        while (H.size() < sylow_order) {
            u64 best = 0;
            unsigned best_k = 0;
            for (u64 x : S) {
                unsigned k = 0;
                for (u64 y = x; h_pos[y] < 0; y = pw(y, ell)) ++k;
                if (k > best_k) {
                    best_k = k;
                    best = x;
                }
            }
            const u64 step = arith::ipow(ell, best_k);
            const auto& a = H_coords[static_cast<std::size_t>(h_pos[pw(best, step)])];
            u64 x = best;
            for (std::size_t i = 0; i < local.size(); ++i) {
                if (a[i] % step != 0) throw std::logic_error("unit group basis construction failed");
                const u64 back = (local[i].order - a[i] / step) % local[i].order;
                x = mul(x, pw(local[i].residue, back));
            }
            local.push_back({x, step});
            std::vector<u64> nH;
            std::vector<std::vector<u32>> nC;
            nH.reserve(H.size() * step);
            for (std::size_t idx = 0; idx < H.size(); ++idx) {
                u64 y = H[idx];
                for (u64 j = 0; j < step; ++j) {
                    auto c = H_coords[idx];
                    c.push_back(static_cast<u32>(j));
                    nH.push_back(y);
                    nC.push_back(std::move(c));
                    y = mul(y, x);
                }
            }
            H = std::move(nH);
            H_coords = std::move(nC);
            std::fill(h_pos.begin(), h_pos.end(), -1);
            for (std::size_t idx = 0; idx < H.size(); ++idx) {
                if (h_pos[H[idx]] >= 0) throw std::logic_error("unit group basis is not independent");
                h_pos[H[idx]] = static_cast<long>(idx);
            }
        }
        gens_.insert(gens_.end(), local.begin(), local.end());
    }

    const std::size_t r = gens_.size();
    dlog_.assign(residues_ * std::max<std::size_t>(r, 1), 0);
    std::vector<char> seen(residues_, 0);
    std::vector<u32> digits(r, 0);
    u64 value = 1;
    for (u64 step = 0; step < phi; ++step) {
        if (seen[value] || pos_[value] < 0) throw std::logic_error("unit group generators do not span");
        seen[value] = 1;
        std::copy(digits.begin(), digits.end(), dlog_.begin() + static_cast<long>(value * r));
        for (std::size_t i = 0; i < r; ++i) {
            value = mul(value, gens_[i].residue);
            if (++digits[i] < gens_[i].order) break;
            digits[i] = 0;
        }
    }

    square_.assign(residues_, 0);
    for (u64 x : units_) square_[mul(x, x)] = 1;
    for (u64 x : units_)
        if (square_[x]) squares_.push_back(x);
    const u64 ratio = phi / squares_.size();
    while ((u64{1} << t_) < ratio) ++t_;
    unsigned even = 0;
    for (const auto& g : gens_)
        if (g.order % 2 == 0) ++even;
    if ((u64{1} << t_) != ratio || even != t_ || phi % squares_.size() != 0)
        throw std::logic_error("G/G^2 is not an elementary 2-group of the expected rank");
}

u64 UnitClassTable::residue_of(const PolyFq& f) const { return (f % M_).index(); }

u64 UnitClassTable::mul(u64 a, u64 b) const {
    return ((PolyFq::from_index(q_, a) * PolyFq::from_index(q_, b)) % M_).index();
}

std::span<const u32> UnitClassTable::dlog(u64 residue) const {
    if (residue >= residues_ || pos_[residue] < 0 || gens_.empty()) return {};
    return {dlog_.data() + residue * gens_.size(), gens_.size()};
}

std::shared_ptr<const UnitClassTable> unit_class_table(u32 q, const PolyFq& M) {
    return std::make_shared<const UnitClassTable>(q, M);
}

std::optional<unsigned> t_case_formula(u32 q, const PolyFq& M) {
    if (M.degree() < 1) return std::nullopt;
    // factor M by trial division with irreducibles up to its degree
    unsigned r = 0;
    bool squarefree = true;
    PolyFq rest = M;
    for (const auto& P : enumerate_irreducibles(q, static_cast<unsigned>(M.degree()))) {
        if (rest.degree() < P.degree()) break;
        unsigned k = 0;
        for (;;) {
            auto [quot, rem] = divmod(rest, P);
            if (!rem.is_zero()) break;
            rest = quot;
            ++k;
        }
        if (k > 0) ++r;
        if (k > 1) squarefree = false;
    }
    if (!squarefree) return std::nullopt;
    return q == 2 ? 1u : (1u << r);
}

// ---- characters --------------------------------------------------------------

FFCharacter::FFCharacter(std::shared_ptr<const UnitClassTable> table, std::vector<u32> exponents)
    : table_(std::move(table)), exponents_(std::move(exponents)) {
    const auto& gens = table_->generators();
    if (exponents_.size() != gens.size())
        throw std::invalid_argument("character needs one exponent per generator");
    for (std::size_t i = 0; i < gens.size(); ++i) {
        if (exponents_[i] >= gens[i].order) throw std::invalid_argument("character exponent out of range");
        if (exponents_[i] != 0) principal_ = false;
        if ((2 * exponents_[i]) % gens[i].order != 0) real_ = false;
    }
}

std::optional<u64> FFCharacter::value_index(u64 residue) const {
    if (residue >= table_->residue_count() || !table_->is_unit(residue)) return std::nullopt;
    const auto d = table_->dlog(residue);
    const auto& gens = table_->generators();
    const u64 phi = table_->phi();
    u64 k = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        k = (k + u64{exponents_[i]} * d[i] % gens[i].order * (phi / gens[i].order)) % phi;
    return k;
}

cplx FFCharacter::operator()(const PolyFq& f) const {
    const auto k = value_index(table_->residue_of(f));
    return k ? dirichlet::root_of_unity(*k, table_->phi()) : cplx{0.0, 0.0};
}

std::string FFCharacter::label() const {
    std::string s = table_->modulus().pretty() + ":";
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(exponents_[i]);
    }
    return s;
}

std::vector<FFCharacter> ff_characters(std::shared_ptr<const UnitClassTable> table) {
    const auto& gens = table->generators();
    std::vector<FFCharacter> out;
    std::vector<u32> e(gens.size(), 0);
    for (;;) {
        out.emplace_back(table, e);
        std::size_t i = gens.size();
        bool done = true;
        while (i > 0) {
            --i;
            if (++e[i] < gens[i].order) {
                done = false;
                break;
            }
            e[i] = 0;
        }
        if (done) return out;
    }
}

namespace {

// histogram of chi exponents over monic f of degree d coprime to M
std::vector<u64> coefficient_histogram(const FFCharacter& chi, unsigned d) {
    const auto& table = chi.table();
    const u32 q = table.field();
    const u64 phi = table.phi();
    if (checked_pow(q, d, kEnumerationBudget) == 0)
        throw std::invalid_argument("enumeration budget exceeded for L-coefficient of degree " + std::to_string(d));
    const u64 count = checked_pow(q, d, kEnumerationBudget);
    std::vector<u64> hist(phi, 0);
    const bool direct = static_cast<int>(d) < table.modulus().degree();
    for (u64 lower = 0; lower < count; ++lower) {
        const u64 idx = lower + count;  // monic: leading digit 1 at position d
        const u64 residue = direct ? idx : table.residue_of(PolyFq::from_index(q, idx));
        if (auto k = chi.value_index(residue)) ++hist[*k];
    }
    return hist;
}

cplx histogram_value(const std::vector<u64>& hist) {
    cplx s = 0;
    const u64 n = hist.size();
    for (u64 k = 0; k < n; ++k)
        if (hist[k]) s += static_cast<double>(hist[k]) * dirichlet::root_of_unity(k, n);
    return s;
}

}  // namespace

cplx l_coefficient(const FFCharacter& chi, unsigned d) { return histogram_value(coefficient_histogram(chi, d)); }

LPolynomial l_polynomial(const FFCharacter& chi) {
    if (chi.is_principal()) throw std::invalid_argument("l_polynomial needs a nonprincipal character");
    const auto& table = chi.table();
    const u32 q = table.field();
    const auto deg = static_cast<unsigned>(table.modulus().degree());
    const u64 phi = table.phi();
    LPolynomial lp;
    for (unsigned d = 0; d < deg; ++d) {
        const auto hist = coefficient_histogram(chi, d);
        lp.coefficients.push_back(histogram_value(hist));
        if (chi.is_real()) {
            long long c = 0;
            for (u64 k = 0; k < phi; ++k) c += (k == 0 ? 1 : -1) * static_cast<long long>(hist[k]);
            lp.integer_coeffs.push_back(c);
        }
    }
    const double u = 1.0 / std::sqrt(static_cast<double>(q));
    cplx v = 0;
    double up = 1.0;
    for (const auto& c : lp.coefficients) {
        v += c * up;
        up *= u;
    }
    lp.central_value = v;

    if (chi.is_real()) {
        // u = q^{-1/2} is a root of P iff w = sqrt(q) is a root of the reversed
        // polynomial; divide that by w^2 - q over the integers
        // reversed polynomial, highest degree first: c_0, c_1, ..., c_D
        std::vector<arith::i128> rev(lp.integer_coeffs.begin(), lp.integer_coeffs.end());
        while (!rev.empty() && rev.back() == 0) rev.pop_back();
        lp.exact = true;
        while (rev.size() >= 3) {
            // rev is highest degree first
            std::vector<arith::i128> quot(rev.size() - 2, 0);
            std::vector<arith::i128> work = rev;
            for (std::size_t i = 0; i + 2 < work.size(); ++i) {
                quot[i] = work[i];
                work[i + 2] += static_cast<arith::i128>(q) * work[i];
                work[i] = 0;
            }
            if (work[work.size() - 1] != 0 || work[work.size() - 2] != 0) break;
            ++lp.m;
            rev = std::move(quot);
        }
    } else if (std::abs(v) <= dirichlet::kCentralZeroThreshold) {
        throw dirichlet::CentralZeroError("L(1/2, chi) vanishes numerically for chi = " + chi.label());
    }
    return lp;
}

// ---- series --------------------------------------------------------------------

sums::CheckpointSeries ff_bias_series(u32 q, const PolyFq& M, unsigned n_max) {
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    const auto table = unit_class_table(q, M);
    const u64 phi = table->phi();

    for (const auto& chi : ff_characters(table)) {
        if (chi.is_principal()) continue;
        if (l_polynomial(chi).m != 0)
            throw dirichlet::CentralZeroError("L(1/2, chi) vanishes for chi = " + chi.label() +
                                              "; m(sigma) is not zero");
    }

    const auto& units = table->units();
    std::vector<std::vector<u64>> counts(n_max + 1, std::vector<u64>(phi + 1, 0));  // last slot: excluded
    for_each_irreducible(q, n_max, [&](const PolyFq& P) {
        const u64 r = table->residue_of(P);
        const auto it = std::lower_bound(units.begin(), units.end(), r);
        const std::size_t slot = (it != units.end() && *it == r) ? static_cast<std::size_t>(it - units.begin()) : phi;
        ++counts[static_cast<std::size_t>(P.degree())][slot];
    });

    std::vector<u64> pts(n_max);
    for (unsigned n = 1; n <= n_max; ++n) pts[n - 1] = n;
    sums::CheckpointSeries out;
    out.grid = primes::make_grid_from_points(pts);
    out.x_label = "n";

    std::vector<sums::CompensatedSum> acc(phi + 2);  // classes, excluded, total
    std::vector<u64> running(phi + 1, 0);
    std::vector<std::vector<double>> sum_cols(phi + 2, std::vector<double>(n_max));
    std::vector<std::vector<double>> count_cols(phi, std::vector<double>(n_max));
    for (unsigned n = 1; n <= n_max; ++n) {
        const double w = std::pow(static_cast<double>(q), -0.5 * n);
        for (std::size_t s = 0; s <= phi; ++s) {
            const u64 c = counts[n][s];
            if (c == 0) continue;
            acc[s].add(static_cast<double>(c) * w);
            acc[phi + 1].add(static_cast<double>(c) * w);
            running[s] += c;
        }
        for (std::size_t s = 0; s < phi + 2; ++s) sum_cols[s][n - 1] = acc[s].result();
        for (std::size_t s = 0; s < phi; ++s) count_cols[s][n - 1] = static_cast<double>(running[s]);
    }

    std::vector<std::string> labels;
    for (u64 r : units) labels.push_back(table->residue_poly(r).pretty());
    for (std::size_t s = 0; s < phi; ++s) out.add_column(sums::class_column(labels[s]), sum_cols[s]);
    for (std::size_t s = 0; s < phi; ++s) out.add_column("count:" + labels[s], count_cols[s]);
    out.add_column(sums::kExcludedColumn, sum_cols[phi]);
    out.add_column(sums::kTotalColumn, sum_cols[phi + 1]);

    const double t_pow = std::ldexp(1.0, static_cast<int>(table->t()));
    for (std::size_t s = 0; s < phi; ++s) {
        const double slope = table->is_square(units[s]) ? (t_pow - 1.0) / 2.0 : -0.5;
        std::vector<double> pred(n_max);
        for (unsigned n = 1; n <= n_max; ++n) pred[n - 1] = slope * std::log(static_cast<double>(n));
        out.add_column("prediction:" + labels[s], std::move(pred));
        out = sums::residual_series(out,
                                    {{sums::kTotalColumn, 1.0},
                                     {sums::class_column(labels[s]), -static_cast<double>(phi)}},
                                    slope, sums::Scale::LogN, "bias:" + labels[s], "residual:" + labels[s]);
    }

    out.metadata["q"] = std::to_string(q);
    out.metadata["M"] = M.to_string();
    out.metadata["Phi"] = std::to_string(phi);
    out.metadata["t"] = std::to_string(table->t());
    out.metadata["scale"] = "log n";
    const auto formula_t = t_case_formula(q, M);
    if (formula_t) {
        out.metadata["t_case_formula"] = std::to_string(*formula_t);
        out.metadata["t_check"] = *formula_t == table->t() ? "agree" : "disagree";
    } else {
        out.metadata["t_check"] = "not-squarefree";
    }
    return out;
}

sums::CheckpointSeries ff_euler_product(const FFCharacter& chi, unsigned n_max) {
    const auto lp = l_polynomial(chi);
    if (lp.m != 0)
        throw dirichlet::CentralZeroError("central zero of order " + std::to_string(lp.m) + " for chi = " +
                                          chi.label() + "; only m = 0 is supported");
    const auto& table = chi.table();
    const u32 q = table.field();
    const u64 phi = table.phi();
    const cplx target = lp.central_value * (chi.nu() ? std::numbers::sqrt2 : 1.0);

    std::vector<std::vector<u64>> hist(n_max + 1, std::vector<u64>(phi, 0));
    if (n_max >= 1)
        for_each_irreducible(q, n_max, [&](const PolyFq& P) {
            if (auto k = chi.value_index(table.residue_of(P))) ++hist[static_cast<std::size_t>(P.degree())][*k];
        });

    std::vector<u64> pts(n_max + 1);
    for (unsigned n = 0; n <= n_max; ++n) pts[n] = n;
    sums::CheckpointSeries out;
    out.grid = primes::make_grid_from_points(pts);
    out.x_label = "n";

    sums::CompensatedSum re, im;
    std::vector<double> lre(n_max + 1), lim(n_max + 1), pre(n_max + 1), pim(n_max + 1), dev(n_max + 1);
    for (unsigned n = 0; n <= n_max; ++n) {
        const double r = std::pow(static_cast<double>(q), -0.5 * n);
        for (u64 k = 0; n > 0 && k < phi; ++k) {
            if (hist[n][k] == 0) continue;
            const cplx z = dirichlet::root_of_unity(k, phi) * r;
            const double c = static_cast<double>(hist[n][k]);
            re.add(-0.5 * c * std::log1p(-2.0 * z.real() + std::norm(z)));
            im.add(-c * std::atan2(-z.imag(), 1.0 - z.real()));
        }
        lre[n] = re.result();
        lim[n] = im.result();
        const cplx prod = std::exp(cplx(lre[n], lim[n]));
        pre[n] = prod.real();
        pim[n] = prod.imag();
        dev[n] = std::abs(prod - target) / std::abs(target);
    }
    out.add_column("product_re", pre);
    out.add_column("product_im", pim);
    out.add_column("log_product_re", lre);
    out.add_column("log_product_im", lim);
    out.add_column("target_re", std::vector<double>(n_max + 1, target.real()));
    out.add_column("target_im", std::vector<double>(n_max + 1, target.imag()));
    out.add_column("relative_deviation", dev);
    out.metadata["character"] = chi.label();
    out.metadata["nu"] = std::to_string(chi.nu());
    out.metadata["m"] = std::to_string(lp.m);
    std::ostringstream os;
    os.precision(17);
    os << lp.central_value.real();
    out.metadata["l_half_re"] = os.str();
    return out;
}

}  // namespace cbias::ff
