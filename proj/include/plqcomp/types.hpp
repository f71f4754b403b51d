#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <limits>
#include <stdexcept>
#include <string>

namespace plqcomp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Extended real value: a finite number or one of the two infinities.
class ExtendedReal {
 public:
  enum class Kind { Finite, PlusInfinity, MinusInfinity };

  static ExtendedReal finite(double value) { return ExtendedReal(Kind::Finite, value); }
  static ExtendedReal plus_infinity() { return ExtendedReal(Kind::PlusInfinity, kInf); }
  static ExtendedReal minus_infinity() { return ExtendedReal(Kind::MinusInfinity, -kInf); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_plus_infinity() const { return kind_ == Kind::PlusInfinity; }
  bool is_minus_infinity() const { return kind_ == Kind::MinusInfinity; }

  /// Finite value; throws for the infinities.
  double value() const {
    if (!is_finite()) throw std::domain_error("ExtendedReal: value() of an infinite quantity");
    return value_;
  }
  /// Value as a double with IEEE infinities.
  double to_double() const { return value_; }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Finite || a.value_ == b.value_);
  }

 private:
  ExtendedReal(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

std::string to_string(const ExtendedReal& value);

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace plqcomp
