#ifndef MASSCOVER_EXTENDED_REAL_HPP
#define MASSCOVER_EXTENDED_REAL_HPP

#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>

namespace masscover {

/// A finite real or +infinity. Infinity is a tagged state, not a float
/// sentinel: value() is only legal on finite instances and arithmetic
/// pattern-matches on the tag.
class ExtendedReal {
 public:
  ExtendedReal() : v_(0.0), finite_(true) {}
  ExtendedReal(double v) : v_(v), finite_(true) { assert(std::isfinite(v)); }

  static ExtendedReal infinity() {
    ExtendedReal e;
    e.finite_ = false;
    return e;
  }

  bool is_finite() const { return finite_; }

  double value() const {
    assert(finite_);
    return v_;
  }

  /// Finite value, or +inf as a double when infinite (for display only).
  double as_double() const {
    return finite_ ? v_ : std::numeric_limits<double>::infinity();
  }

  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
    if (!a.finite_ || !b.finite_) return infinity();
    return ExtendedReal(a.v_ + b.v_);
  }

  friend ExtendedReal operator*(double c, const ExtendedReal& a) {
    assert(c > 0.0);
    if (!a.finite_) return infinity();
    return ExtendedReal(c * a.v_);
  }

  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (!a.finite_) return false;
    if (!b.finite_) return true;
    return a.v_ < b.v_;
  }
  friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
  friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
  friend bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return !(a < b); }
  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.finite_ != b.finite_) return false;
    return !a.finite_ || a.v_ == b.v_;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& e) {
    if (e.finite_) return os << e.v_;
    return os << "inf";
  }

 private:
  double v_;
  bool finite_;
};

}  // namespace masscover

#endif
