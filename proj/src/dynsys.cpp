#include "clockspec/dynsys.hpp"

#include <cmath>
#include <cstdlib>

#include "clockspec/rng.hpp"

namespace clockspec::dynsys {

// ---------------------------------------------------------------- BitWord

namespace {
// Map a signed base index to a distinct RNG counter.
inline std::uint64_t zigzag(long i) {
    return i >= 0 ? 2ull * static_cast<std::uint64_t>(i)
                  : 2ull * static_cast<std::uint64_t>(-(i + 1)) + 1ull;
}
}  // namespace

BitWord BitWord::random_one_sided(std::uint64_t key) {
    BitWord w;
    w.two_sided_ = false;
    w.key_ = key;
    return w;
}

BitWord BitWord::random_two_sided(std::uint64_t key) {
    BitWord w;
    w.two_sided_ = true;
    w.key_ = key;
    return w;
}

BitWord BitWord::from_bits(const std::vector<int>& bits, long first_index,
                           bool two_sided, std::uint64_t tail_key) {
    BitWord w;
    w.two_sided_ = two_sided;
    w.key_ = tail_key;
    if (!two_sided && first_index < 0)
        throw ConfigError("BitWord: one-sided word cannot hold negative indices");
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] != 0 && bits[k] != 1)
            throw ConfigError("BitWord: bits must be 0 or 1");
        w.window_[first_index + static_cast<long>(k)] =
            static_cast<std::uint8_t>(bits[k]);
    }
    return w;
}

int BitWord::bit(long i) const {
    if (!two_sided_ && i < 0)
        throw ConfigError("BitWord: negative index on a one-sided word");
    if (has_partner_range_ && (i < agree_lo_ || i > agree_hi_))
        return rng::bit(fresh_key_, zigzag(i));
    const long base = i + offset_;
    auto it = window_.find(base);
    if (it != window_.end()) return it->second;
    return rng::bit(key_, zigzag(base));
}

void BitWord::set_bit(long i, int value) {
    if (!two_sided_ && i < 0)
        throw ConfigError("BitWord: negative index on a one-sided word");
    if (value != 0 && value != 1) throw ConfigError("BitWord: bits must be 0 or 1");
    window_[i + offset_] = static_cast<std::uint8_t>(value);
}

BitWord BitWord::partner(long agree_lo, long agree_hi, std::uint64_t fresh_key) const {
    BitWord p = *this;
    p.has_partner_range_ = true;
    p.agree_lo_ = agree_lo;
    p.agree_hi_ = agree_hi;
    p.fresh_key_ = fresh_key;
    return p;
}

double dyadic_fraction(const BitWord& word, long j, int bits) {
    if (bits < 1 || bits > 53) throw ConfigError("dyadic_fraction: bits must be in [1, 53]");
    std::uint64_t mant = 0;
    for (int i = 0; i < bits; ++i)
        mant = (mant << 1) | static_cast<std::uint64_t>(word.bit(j + i));
    return std::ldexp(static_cast<double>(mant), -bits);
}

void dyadic_step(BitWord& word) {
    if (word.two_sided()) throw ConfigError("dyadic_step: expected a one-sided word");
    word.shift(1);
}

void baker_step(BitWord& word) {
    if (!word.two_sided()) throw ConfigError("baker_step: expected a two-sided word");
    word.shift(1);
}

double baker_x(const BitWord& word) { return dyadic_fraction(word, 0, 53); }

double baker_y(const BitWord& word) {
    std::uint64_t mant = 0;
    for (int i = 1; i <= 53; ++i)
        mant = (mant << 1) | static_cast<std::uint64_t>(word.bit(-i));
    return std::ldexp(static_cast<double>(mant), -53);
}

// ------------------------------------------------------------ FixedPointT2

FixedPointT2::FixedPointT2(int precision_bits) {
    if (precision_bits < 8) throw ConfigError("FixedPointT2: precision budget below 8 bits");
    prec_ = precision_bits;
    remaining_ = precision_bits;
    const std::size_t limbs = static_cast<std::size_t>((precision_bits + 63) / 64);
    x_.assign(limbs, 0);
    y_.assign(limbs, 0);
}

void FixedPointT2::mask_top(std::vector<std::uint64_t>& a) const {
    const int top_bits = prec_ % 64;
    if (top_bits != 0) a.back() &= (~0ull) >> (64 - top_bits);
}

void FixedPointT2::add_mod(std::vector<std::uint64_t>& a,
                           const std::vector<std::uint64_t>& b) const {
    unsigned __int128 carry = 0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        unsigned __int128 s = static_cast<unsigned __int128>(a[l]) + b[l] + carry;
        a[l] = static_cast<std::uint64_t>(s);
        carry = s >> 64;
    }
    mask_top(a);  // reduction mod 2^prec == mod 1
}

FixedPointT2 FixedPointT2::random(std::uint64_t key, int precision_bits) {
    FixedPointT2 p(precision_bits);
    for (std::size_t l = 0; l < p.x_.size(); ++l) {
        p.x_[l] = rng::at(key, 2 * l);
        p.y_[l] = rng::at(key, 2 * l + 1);
    }
    p.mask_top(p.x_);
    p.mask_top(p.y_);
    return p;
}

FixedPointT2 FixedPointT2::from_rational(std::int64_t px, std::int64_t qx,
                                         std::int64_t py, std::int64_t qy,
                                         int precision_bits) {
    if (qx <= 0 || qy <= 0 || px < 0 || py < 0 || px >= qx || py >= qy)
        throw ConfigError("FixedPointT2: rational coordinates must satisfy 0 <= p < q");
    FixedPointT2 p(precision_bits);
    // floor(p * 2^P / q) one bit at a time, most significant first.
    auto fill = [&](std::vector<std::uint64_t>& out, std::uint64_t pp, std::uint64_t qq) {
        std::uint64_t rem = pp;
        for (int i = precision_bits - 1; i >= 0; --i) {
            rem <<= 1;
            if (rem >= qq) {
                rem -= qq;
                out[static_cast<std::size_t>(i) / 64] |= 1ull << (i % 64);
            }
        }
    };
    fill(p.x_, static_cast<std::uint64_t>(px), static_cast<std::uint64_t>(qx));
    fill(p.y_, static_cast<std::uint64_t>(py), static_cast<std::uint64_t>(qy));
    return p;
}

void FixedPointT2::cat_step() {
    if (remaining_ < CAT_STEP_COST_BITS)
        throw NumericError("FixedPointT2: precision budget exhausted after " +
                           std::to_string(steps_) + " steps");
    // (x, y) <- (2x + y, x + y): y' reuses the old x, so compute it first.
    std::vector<std::uint64_t> new_y = x_;
    add_mod(new_y, y_);
    // x <- 2x
    std::uint64_t carry = 0;
    for (std::size_t l = 0; l < x_.size(); ++l) {
        const std::uint64_t next_carry = x_[l] >> 63;
        x_[l] = (x_[l] << 1) | carry;
        carry = next_carry;
    }
    mask_top(x_);
    add_mod(x_, y_);
    y_ = std::move(new_y);
    remaining_ -= CAT_STEP_COST_BITS;
    ++steps_;
}

double FixedPointT2::to_double(const std::vector<std::uint64_t>& a) const {
    // Only the top three limbs can influence the leading 53 bits.
    double v = 0.0;
    const int n = static_cast<int>(a.size());
    for (int l = n - 1; l >= 0 && l >= n - 3; --l)
        v += std::ldexp(static_cast<double>(a[static_cast<std::size_t>(l)]), 64 * l - prec_);
    return v;
}

// ------------------------------------------------------------- Observable

double Observable::eval(const BitWord& word) const {
    switch (kind) {
        case Kind::Constant:
            return constant;
        case Kind::Fraction:
            return dyadic_fraction(word, 0, fraction_bits);
        case Kind::BitTable: {
            const long lo = two_sided ? -static_cast<long>(half_width) : 0;
            const long hi = half_width;
            std::size_t pattern = 0;
            for (long i = lo; i <= hi; ++i)
                pattern = (pattern << 1) | static_cast<std::size_t>(word.bit(i));
            return table[pattern];
        }
    }
    throw NumericError("Observable: corrupt kind");
}

static void check_table(const std::vector<double>& values, std::size_t expect) {
    if (values.size() != expect)
        throw ConfigError("Observable: value table must have " + std::to_string(expect) +
                          " entries, got " + std::to_string(values.size()));
    for (double v : values)
        if (!(std::fabs(v) <= 1.0))
            throw ConfigError("Observable: table values must lie in [-1, 1]");
}

Observable Observable::bit_table_one_sided(int half_width, std::vector<double> values) {
    if (half_width < 0 || half_width > 20)
        throw ConfigError("Observable: half width out of range [0, 20]");
    check_table(values, std::size_t{1} << (half_width + 1));
    Observable o;
    o.kind = Kind::BitTable;
    o.two_sided = false;
    o.half_width = half_width;
    o.table = std::move(values);
    return o;
}

Observable Observable::bit_table_two_sided(int half_width, std::vector<double> values) {
    if (half_width < 0 || half_width > 10)
        throw ConfigError("Observable: half width out of range [0, 10]");
    check_table(values, std::size_t{1} << (2 * half_width + 1));
    Observable o;
    o.kind = Kind::BitTable;
    o.two_sided = true;
    o.half_width = half_width;
    o.table = std::move(values);
    return o;
}

Observable Observable::fraction() {
    Observable o;
    o.kind = Kind::Fraction;
    return o;
}

Observable Observable::constant_obs(double value) {
    if (!(std::fabs(value) <= 1.0))
        throw ConfigError("Observable: constant must lie in [-1, 1]");
    Observable o;
    o.kind = Kind::Constant;
    o.constant = value;
    return o;
}

double eval_rects(const std::vector<TorusRect>& rects, double x, double y) {
    double v = 0.0;
    for (const auto& r : rects)
        if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) v += r.value;
    return v;
}

void validate_rects(const std::vector<TorusRect>& rects) {
    if (rects.empty()) throw ConfigError("rectangle observable: empty rectangle list");
    for (const auto& r : rects) {
        if (!(r.x0 >= 0 && r.x0 < r.x1 && r.x1 <= 1 && r.y0 >= 0 && r.y0 < r.y1 && r.y1 <= 1))
            throw ConfigError("rectangle observable: rectangles must be inside [0,1)^2");
        if (!(std::fabs(r.value) <= 1.0))
            throw ConfigError("rectangle observable: values must lie in [-1, 1]");
    }
}

// -------------------------------------------------------------- diagnostics

CylinderDiameter cylinder_diameter(BitSystem system, int depth) {
    if (depth < 1 || depth > 60) throw ConfigError("cylinder_diameter: depth out of range [1, 60]");
    if (system == BitSystem::Dyadic) {
        // Fixing bits 0..depth-1 pins x to an interval of length 2^-depth.
        return {std::ldexp(1.0, -depth), 0.0};
    }
    // Baker: fixing indices -depth..depth pins depth+1 forward bits (x)
    // and depth backward bits (y).
    return {std::ldexp(1.0, -(depth + 1)), std::ldexp(1.0, -depth)};
}

double variation_estimate(const Observable& obs, BitSystem system, long lo,
                          long hi, int samples, std::uint64_t seed) {
    if (lo > hi) throw ConfigError("variation_estimate: window lower end exceeds upper end");
    if (samples < 1) throw ConfigError("variation_estimate: need at least one sample");
    if (system == BitSystem::Dyadic && lo < 0)
        throw ConfigError("variation_estimate: dyadic windows start at index >= 0");
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const std::uint64_t key_a = rng::stream_key(seed, 11, static_cast<std::uint64_t>(s));
        const std::uint64_t key_b = rng::stream_key(seed, 12, static_cast<std::uint64_t>(s));
        const BitWord w = (system == BitSystem::Dyadic) ? BitWord::random_one_sided(key_a)
                                                        : BitWord::random_two_sided(key_a);
        const BitWord w2 = w.partner(lo, hi, key_b);
        const double d = std::fabs(obs.eval(w2) - obs.eval(w));
        if (d > worst) worst = d;
    }
    return worst;
}

}  // namespace clockspec::dynsys
