#pragma once

// Deterministic symbolic dynamics used as amplitude sources: the dyadic
// doubling map (one-sided bit shift), the baker's map (two-sided bit
// shift) and the hyperbolic torus automorphism induced by [[2,1],[1,1]].
//
// Bit systems are never iterated in floating point: a point is a lazy
// bit word and the map is an index shift, so arbitrarily many iterations
// stay exact.  The torus map is iterated in fixed-point arithmetic mod 1
// with an explicit precision budget; each step spends two guard bits
// (the expansion rate of the map rounded up to the next power of two).

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "clockspec/common.hpp"

namespace clockspec::dynsys {

// ---------------------------------------------------------------- BitWord

class BitWord {
  public:
    static BitWord random_one_sided(std::uint64_t key);
    static BitWord random_two_sided(std::uint64_t key);
    // Explicit bits at indices first_index .. first_index+bits.size()-1;
    // everything else is lazily drawn from `tail_key`.
    static BitWord from_bits(const std::vector<int>& bits, long first_index,
                             bool two_sided, std::uint64_t tail_key);

    bool two_sided() const { return two_sided_; }

    // Bit at current index i (0/1).  One-sided words reject i < 0.
    int bit(long i) const;

    // Left shift by k places: new bit(i) = old bit(i + k).
    void shift(long k) { offset_ += k; }

    void set_bit(long i, int value);

    // A word agreeing with *this on current indices [agree_lo, agree_hi]
    // and carrying fresh random bits everywhere else.  Intended for
    // immediate evaluation (do not shift the partner).
    BitWord partner(long agree_lo, long agree_hi, std::uint64_t fresh_key) const;

  private:
    BitWord() = default;
    bool two_sided_ = false;
    long offset_ = 0;
    std::uint64_t key_ = 0;
    std::unordered_map<long, std::uint8_t> window_;  // keyed by base index
    // partner state
    bool has_partner_range_ = false;
    long agree_lo_ = 0, agree_hi_ = 0;
    std::uint64_t fresh_key_ = 0;
};

// Fractional value of the bit block starting at index j:
//   sum_{i=0}^{bits-1} bit(j+i) * 2^{-(i+1)}   in [0, 1).
double dyadic_fraction(const BitWord& word, long j, int bits);

// One step of the doubling map x -> {2x} on a one-sided word.
void dyadic_step(BitWord& word);

// One step of the baker's map on a two-sided word (left shift; the
// geometric coordinates are x = sum_{i>=0} w_i 2^{-i-1},
// y = sum_{i>=1} w_{-i} 2^{-i}).
void baker_step(BitWord& word);

// Geometric coordinates of a two-sided word, to 53 bits.
double baker_x(const BitWord& word);
double baker_y(const BitWord& word);

// ------------------------------------------------------------ FixedPointT2

// A point of the 2-torus stored as a pair of fixed-point fractions with
// `precision_bits` bits, iterated exactly mod 2^P.  The budget tracks how
// many of those bits still describe the orbit of the intended real point:
// the map expands by (3+sqrt(5))/2 per step, so each step costs 2 bits.
class FixedPointT2 {
  public:
    static constexpr int CAT_STEP_COST_BITS = 2;  // ceil(log2 of the expansion rate)

    explicit FixedPointT2(int precision_bits);
    static FixedPointT2 random(std::uint64_t key, int precision_bits);
    static FixedPointT2 from_rational(std::int64_t px, std::int64_t qx,
                                      std::int64_t py, std::int64_t qy,
                                      int precision_bits);

    // (x, y) <- (2x + y, x + y) mod 1.  Throws NumericError once fewer
    // than CAT_STEP_COST_BITS of precision remain.
    void cat_step();

    int precision_bits() const { return prec_; }
    int remaining_bits() const { return remaining_; }
    long steps_taken() const { return steps_; }

    double x() const { return to_double(x_); }
    double y() const { return to_double(y_); }

  private:
    int prec_ = 0;
    int remaining_ = 0;
    long steps_ = 0;
    std::vector<std::uint64_t> x_, y_;  // little-endian limbs, value/2^prec_

    void add_mod(std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) const;
    void mask_top(std::vector<std::uint64_t>& a) const;
    double to_double(const std::vector<std::uint64_t>& a) const;
};

inline void cat_map_step(FixedPointT2& p) { p.cat_step(); }

// ------------------------------------------------------------- Observable

// Bounded observable on bit words: a value table over a finite bit
// pattern, the fractional value of the word (Hoelder), or a constant.
struct Observable {
    enum class Kind { BitTable, Fraction, Constant };

    Kind kind = Kind::Constant;
    bool two_sided = false;  // table window is [-w, w] if true, else [0, w]
    int half_width = 0;
    std::vector<double> table;
    double constant = 0.0;
    int fraction_bits = 53;

    double eval(const BitWord& word) const;

    static Observable bit_table_one_sided(int half_width, std::vector<double> values);
    static Observable bit_table_two_sided(int half_width, std::vector<double> values);
    static Observable fraction();
    static Observable constant_obs(double value);
};

// Rectangle observable on the torus (used with the cat map).
struct TorusRect {
    double x0, x1, y0, y1;  // [x0,x1) x [y0,y1)
    double value;
};

double eval_rects(const std::vector<TorusRect>& rects, double x, double y);
void validate_rects(const std::vector<TorusRect>& rects);

// -------------------------------------------------------------- diagnostics

enum class BitSystem { Dyadic, Baker };

struct CylinderDiameter {
    double x_diam;
    double y_diam;  // 0 for the dyadic system
};

// Exact diameter of the cylinder set fixing bits 0..depth-1 (dyadic) or
// -depth..depth (baker).
CylinderDiameter cylinder_diameter(BitSystem system, int depth);

// Monte Carlo lower estimate of the variation
//   Var_[lo,hi](f) = sup { |f(w') - f(w)| : w' = w on [lo, hi] }.
// Pairs are sampled with fresh bits outside the window; the estimate is
// exactly 0 for observables supported inside the window.
double variation_estimate(const Observable& obs, BitSystem system, long lo,
                          long hi, int samples, std::uint64_t seed);

}  // namespace clockspec::dynsys
