#ifndef EPD_ERROR_HPP
#define EPD_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: shapes, ranges, file contents. The CLI maps this to exit 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A library postcondition failed. The CLI maps this to exit 3.
class InvariantError : public Error {
 public:
  using Error::Error;
};

enum class Axis { kHeight, kWidth };

inline const char* AxisName(Axis axis) {
  return axis == Axis::kHeight ? "height" : "width";
}

/// Raised when an image extent is not a multiple of the downsampling factor.
/// Carries enough information for a caller to pad explicitly.
class DivisibilityError : public ValidationError {
 public:
  DivisibilityError(Axis axis, std::size_t extent, std::size_t factor,
                    const std::string& context = {});

  Axis axis() const { return axis_; }
  std::size_t extent() const { return extent_; }
  std::size_t factor() const { return factor_; }
  // Smallest multiple of factor() that is >= extent().
  std::size_t suggested_extent() const {
    return (extent_ + factor_ - 1) / factor_ * factor_;
  }

 private:
  Axis axis_;
  std::size_t extent_;
  std::size_t factor_;
};

}  // namespace epd

#endif  // EPD_ERROR_HPP
