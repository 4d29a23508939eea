#pragma once

#include <stdexcept>
#include <string>

namespace lrp {

// Bad arguments or violated preconditions. The CLI maps this to exit status 1.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A closed form evaluated at a point where it diverges (e.g. delta at s >= 2d).
class DivergenceError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Request exceeds the memory budget. The CLI maps this to exit status 2.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::size_t required_bytes, std::size_t budget_bytes)
      : std::runtime_error(what), required_(required_bytes), budget_(budget_bytes) {}

  std::size_t required_bytes() const noexcept { return required_; }
  std::size_t budget_bytes() const noexcept { return budget_; }

 private:
  std::size_t required_;
  std::size_t budget_;
};

}  // namespace lrp
