#pragma once

/// @file function_field.hpp
/// @brief F_q[T] analogue: irreducible enumeration, residue classes mod M,
/// exact L-polynomials and Euler products at the central point.

#include "cbias/summation.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbias::ff {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using cplx = std::complex<double>;

/// Polynomial over the prime field F_q, coefficients lowest degree first.
class PolyFq {
public:
    /// std::invalid_argument unless q is prime.
    explicit PolyFq(u32 q, std::vector<u32> coeffs = {});
    static PolyFq monomial(u32 q, unsigned degree, u32 coeff = 1);
    /// Inverse of index(): base-q digits, c0 least significant.
    static PolyFq from_index(u32 q, u64 index);
    /// Parses "c0 c1 ... cd".
    static PolyFq parse(u32 q, const std::string& text);

    u32 field() const { return q_; }
    const std::vector<u32>& coeffs() const { return c_; }
    /// -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    bool is_monic() const { return !c_.empty() && c_.back() == 1; }
    u32 coeff(std::size_t k) const { return k < c_.size() ? c_[k] : 0; }
    u64 index() const;

    /// "c0 c1 ... cd" ("0" for zero).
    std::string to_string() const;
    /// Human form such as "T^2+2T+1".
    std::string pretty() const;

    bool operator==(const PolyFq&) const = default;

    friend PolyFq operator+(const PolyFq& a, const PolyFq& b);
    friend PolyFq operator-(const PolyFq& a, const PolyFq& b);
    friend PolyFq operator*(const PolyFq& a, const PolyFq& b);

private:
    void trim();
    u32 q_;
    std::vector<u32> c_;
};

/// Quotient and remainder. std::invalid_argument on a zero divisor or mismatched q.
std::pair<PolyFq, PolyFq> divmod(const PolyFq& a, const PolyFq& b);
PolyFq operator%(const PolyFq& a, const PolyFq& b);
PolyFq powmod(const PolyFq& base, u64 exp, const PolyFq& modulus);
/// Monic gcd.
PolyFq gcd(PolyFq a, PolyFq b);

inline constexpr u64 kEnumerationBudget = u64{1} << 32;

/// Monic irreducibles of degree 1..max_deg, degree ascending, then by index.
/// Polynomial sieve of Eratosthenes. Throws std::invalid_argument if
/// q^max_deg > 2^32.
void for_each_irreducible(u32 q, unsigned max_deg, const std::function<void(const PolyFq&)>& fn);
std::vector<PolyFq> enumerate_irreducibles(u32 q, unsigned max_deg);
/// (1/d) sum_{e | d} mu(e) q^{d/e}
u64 irreducible_count(u32 q, unsigned d);

inline constexpr u64 kUnitBudget = 100000;

struct FFGenerator {
    u64 residue;  ///< residue index
    u64 order;
};

/// (F_q[T]/M)^x with a discrete-log table. Residues are indexed by base-q
/// digits of the reduced polynomial (deg < deg M).
class UnitClassTable {
public:
    /// std::invalid_argument if deg M < 1 or Phi > kUnitBudget.
    UnitClassTable(u32 q, const PolyFq& M);

    u32 field() const { return q_; }
    const PolyFq& modulus() const { return M_; }
    u64 residue_count() const { return residues_; }
    u64 phi() const { return units_.size(); }
    const std::vector<u64>& units() const { return units_; }
    const std::vector<u64>& square_set() const { return squares_; }
    const std::vector<FFGenerator>& generators() const { return gens_; }
    /// dim_F2 of G / G^2.
    unsigned t() const { return t_; }

    u64 residue_of(const PolyFq& f) const;
    PolyFq residue_poly(u64 index) const { return PolyFq::from_index(q_, index); }
    bool is_unit(u64 residue) const { return pos_[residue] >= 0; }
    bool is_square(u64 residue) const { return square_[residue] != 0; }
    u64 mul(u64 a, u64 b) const;
    std::span<const u32> dlog(u64 residue) const;

private:
    u32 q_;
    PolyFq M_;
    u64 residues_ = 0;
    std::vector<u64> units_;
    std::vector<long> pos_;
    std::vector<u64> squares_;
    std::vector<char> square_;
    std::vector<FFGenerator> gens_;
    std::vector<u32> dlog_;
    unsigned t_ = 0;
};

std::shared_ptr<const UnitClassTable> unit_class_table(u32 q, const PolyFq& M);

/// t from the case formula for squarefree M (1 when q = 2, else 2^r with r the
/// number of irreducible factors of M); nullopt when M is not squarefree.
std::optional<unsigned> t_case_formula(u32 q, const PolyFq& M);

/// Character of (F_q[T]/M)^x; values are powers of e(1/Phi).
class FFCharacter {
public:
    FFCharacter(std::shared_ptr<const UnitClassTable> table, std::vector<u32> exponents);

    const UnitClassTable& table() const { return *table_; }
    const std::vector<u32>& exponents() const { return exponents_; }
    bool is_principal() const { return principal_; }
    bool is_real() const { return real_; }
    int nu() const { return (real_ && !principal_) ? 1 : 0; }
    /// k with chi(f) = e(k / Phi); nullopt for non-units.
    std::optional<u64> value_index(u64 residue) const;
    cplx operator()(const PolyFq& f) const;
    std::string label() const;

private:
    std::shared_ptr<const UnitClassTable> table_;
    std::vector<u32> exponents_;
    bool principal_ = true;
    bool real_ = true;
};

/// All Phi characters, principal first.
std::vector<FFCharacter> ff_characters(std::shared_ptr<const UnitClassTable> table);

struct LPolynomial {
    std::vector<cplx> coefficients;          ///< c_0 .. c_{deg M - 1}
    std::vector<long long> integer_coeffs;   ///< set when chi is real
    cplx central_value;                      ///< L at u = q^{-1/2}
    int m = 0;                               ///< central vanishing order
    bool exact = false;                      ///< m decided by exact algebra
};

/// c_d = sum over monic f of degree d coprime to M of chi(f).
cplx l_coefficient(const FFCharacter& chi, unsigned d);

/// Coefficients by enumeration; m exact for real chi, numeric (threshold
/// 1e-8) otherwise. std::invalid_argument for the principal character;
/// dirichlet::CentralZeroError if a complex chi has a numerically vanishing
/// central value.
LPolynomial l_polynomial(const FFCharacter& chi);

/// Per-class sums of q^{-deg P / 2} over monic irreducible P with deg P <= n,
/// checkpoints n = 1..n_max (x_label "n", scale log n). Columns:
/// class:<A>, count:<A>, excluded, total, and for each class
/// bias:<A> = total - Phi class:<A>, prediction:<A>, residual:<A>.
sums::CheckpointSeries ff_bias_series(u32 q, const PolyFq& M, unsigned n_max);

/// prod_{deg P <= n} (1 - chi(P) q^{-deg P/2})^{-1} for n = 0..n_max, with the
/// target sqrt(2)^nu L(1/2, chi) and the relative deviation.
sums::CheckpointSeries ff_euler_product(const FFCharacter& chi, unsigned n_max);

}  // namespace cbias::ff
