#ifndef CCBE_SUMMATION_HPP_
#define CCBE_SUMMATION_HPP_

#include <cmath>
#include <span>

namespace ccbe {

// Neumaier's variant of Kahan summation. Result is insensitive to term order
// up to O(eps) of the largest partial sum, which keeps thread merges stable.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  void add(const CompensatedSum &other) {
    add(other.sum_);
    add(other.comp_);
  }

  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs)
    s.add(x);
  return s.value();
}

} // namespace ccbe

#endif // CCBE_SUMMATION_HPP_
