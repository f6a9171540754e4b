#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace physqa {

// ---------------------------------------------------------------------------
// Errors

enum class ErrorCode {
  Config,
  Io,
  Parse,
  Simulation,
  Validation,
  Unsupported,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

// ---------------------------------------------------------------------------
// Small fixed-size linear algebra. The simulators are 2D (cloth adds a z
// component and uses Vec3); hand-rolled types keep the hot loops transparent
// and portable.

struct Vec2 {
  double x = 0, y = 0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  Vec2 operator-() const { return {-x, -y}; }

  bool operator==(const Vec2&) const = default;

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

  bool operator==(const Vec3&) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Row-major 2x2 matrix.
struct Mat2 {
  double m00 = 0, m01 = 0, m10 = 0, m11 = 0;

  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 zero() { return {0, 0, 0, 0}; }
  static Mat2 outer(const Vec2& a, const Vec2& b) {
    return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
  }

  Mat2 operator+(const Mat2& o) const { return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11}; }
  Mat2 operator-(const Mat2& o) const { return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11}; }
  Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }
  Mat2& operator+=(const Mat2& o) { m00 += o.m00; m01 += o.m01; m10 += o.m10; m11 += o.m11; return *this; }

  Mat2 operator*(const Mat2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }
  Vec2 operator*(const Vec2& v) const { return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y}; }

  Mat2 transposed() const { return {m00, m10, m01, m11}; }
  double trace() const { return m00 + m11; }
  double det() const { return m00 * m11 - m01 * m10; }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// Rotation matrix [[c,-s],[s,c]].
inline Mat2 rotation2(double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c, -s, s, c};
}

// Closed-form 2x2 SVD: F = U * diag(sig) * V^T with U, V rotations.
// sig.y may be negative when F contains a reflection; the elastoplastic
// update relies on that convention for inversion handling.
void svd2(const Mat2& f, Mat2& u, Vec2& sig, Mat2& v);

// ---------------------------------------------------------------------------
// Deterministic RNG. One master seed per scenario; sub-streams are derived
// with a splittable counter scheme (splitmix64 over master ^ tagged counter)
// so individual pipeline stages can be regenerated independently. All draws
// go through this engine; std:: distributions are avoided because their
// output is implementation-defined.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Tagged sub-seed derivation: tag identifies the consumer ("sample", "emit",
// "questions", ...), counter distinguishes repeated uses.
std::uint64_t derive_seed(std::uint64_t master, const std::string& tag, std::uint64_t counter = 0);

class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    // pcg32 seeding
    state_ = 0;
    inc_ = (seed << 1u) | 1u;
    next_u32();
    state_ += splitmix64(seed);
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  std::uint64_t next_u64() {
    return (static_cast<std::uint64_t>(next_u32()) << 32) | next_u32();
  }

  // uniform double in [0, 1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // modulo with rejection to stay unbiased
    std::uint64_t threshold = (-n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  int range(int lo, int hi_inclusive) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
  }

  bool chance(double p) { return uniform() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    if (v.empty()) fail(ErrorCode::Config, "pick from empty pool");
    return v[below(v.size())];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

// ---------------------------------------------------------------------------

inline bool nearly_equal(double a, double b, double rel_tol) {
  double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel_tol * std::max(scale, 1e-300);
}

}  // namespace physqa
