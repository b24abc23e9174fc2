#include "eltd/model_common.hpp"

#include <cstdlib>
#include <limits>

#include "eltd/error.hpp"

namespace eltd {

void mask_leave_out(Eigen::MatrixXd& d, std::span<const std::int64_t> hours, std::int64_t window) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  d.diagonal().setConstant(inf);
  if (window <= 0 || hours.empty()) return;
  const auto T = d.cols();
  if (hours.size() != static_cast<std::size_t>(T) || d.rows() != T) {
    throw Error(ErrorCode::LengthMismatch, "leave-out hours differ from distance matrix");
  }
  // hours are usually sorted, but nothing here relies on it
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto ht = hours[static_cast<std::size_t>(t)];
    bool outside = false;
    for (Eigen::Index s = 0; s < T && !outside; ++s) outside = std::abs(hours[static_cast<std::size_t>(s)] - ht) > window;
    if (!outside) continue;
    for (Eigen::Index s = 0; s < T; ++s) {
      if (std::abs(hours[static_cast<std::size_t>(s)] - ht) <= window) d(s, t) = inf;
    }
  }
}

}  // namespace eltd
