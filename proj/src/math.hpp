#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace g4dc {

struct Vec3f {
  float x = 0.f, y = 0.f, z = 0.f;
};

struct Quatf {
  float w = 1.f, x = 0.f, y = 0.f, z = 0.f;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
  explicit Vec3(const Vec3f& v) : x(v.x), y(v.y), z(v.z) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  Vec3f toFloat() const {
    return {static_cast<float>(x), static_cast<float>(y), static_cast<float>(z)};
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Mat3 {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

  static Mat3 identity() {
    Mat3 r;
    r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
    return r;
  }
  static Mat3 diag(double a, double b, double c) {
    Mat3 r;
    r.m[0][0] = a;
    r.m[1][1] = b;
    r.m[2][2] = c;
    return r;
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
        r.m[i][j] = s;
      }
    return r;
  }
  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }
  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }
};

struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
  explicit Quat(const Quatf& q) : w(q.w), x(q.x), y(q.y), z(q.z) {}

  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Quat normalized() const {
    double n = norm();
    return {w / n, x / n, y / n, z / n};
  }
  Quat negated() const { return {-w, -x, -y, -z}; }
  // Canonical sign for the double cover: first nonzero component positive.
  Quat canonical() const {
    if (w != 0.0) return w > 0 ? *this : negated();
    if (x != 0.0) return x > 0 ? *this : negated();
    if (y != 0.0) return y > 0 ? *this : negated();
    return z >= 0 ? *this : negated();
  }
  Quatf toFloat() const {
    return {static_cast<float>(w), static_cast<float>(x), static_cast<float>(y),
            static_cast<float>(z)};
  }
  static Quat axisAngle(const Vec3& axis, double angleRad) {
    Vec3 a = axis / axis.norm();
    double h = 0.5 * angleRad;
    double s = std::sin(h);
    return {std::cos(h), a.x * s, a.y * s, a.z * s};
  }
};

inline Mat3 quatToMat(const Quat& q) {
  double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 r;
  r.m[0][0] = 1 - 2 * (y * y + z * z);
  r.m[0][1] = 2 * (x * y - w * z);
  r.m[0][2] = 2 * (x * z + w * y);
  r.m[1][0] = 2 * (x * y + w * z);
  r.m[1][1] = 1 - 2 * (x * x + z * z);
  r.m[1][2] = 2 * (y * z - w * x);
  r.m[2][0] = 2 * (x * z - w * y);
  r.m[2][1] = 2 * (y * z + w * x);
  r.m[2][2] = 1 - 2 * (x * x + y * y);
  return r;
}

// Shortest-arc spherical interpolation. If the pair is antipodal to within
// 1e-9 the interpolation axis is undefined; we return q0 and set the flag.
inline Quat slerp(const Quat& q0, const Quat& q1, double u, bool* antipodal = nullptr) {
  Quat b = q1;
  double d = q0.dot(b);
  if (d < 0) {
    b = b.negated();
    d = -d;
  }
  if (d > 1.0) d = 1.0;
  if (1.0 - d < 1e-9) {
    // Nearly identical after sign fix: nlerp is exact enough here.
    Quat r{q0.w + (b.w - q0.w) * u, q0.x + (b.x - q0.x) * u, q0.y + (b.y - q0.y) * u,
           q0.z + (b.z - q0.z) * u};
    return r.normalized();
  }
  if (d < 1e-9) {
    // Antipodal within tolerance before the sign fix means d was ~0 only for
    // true 180-degree pairs; fall back to one endpoint.
    if (antipodal) *antipodal = true;
    return q0;
  }
  double theta = std::acos(d);
  double s = std::sin(theta);
  double c0 = std::sin((1 - u) * theta) / s;
  double c1 = std::sin(u * theta) / s;
  return Quat{c0 * q0.w + c1 * b.w, c0 * q0.x + c1 * b.x, c0 * q0.y + c1 * b.y,
              c0 * q0.z + c1 * b.z}
      .normalized();
}

// Deterministic RNG helpers. std::mt19937_64 output is pinned by the
// standard; the distributions below are hand-rolled so generated scenes are
// reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  uint64_t index(uint64_t n) {  // [0, n)
    return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n;
  }
  double normal() {
    if (haveSpare_) {
      haveSpare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    haveSpare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool haveSpare_ = false;
  double spare_ = 0.0;
};

}  // namespace g4dc
