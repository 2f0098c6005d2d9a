#pragma once

#include <stdexcept>
#include <string>

namespace geoinfer {

// Failure conditions surfaced by the library. Each maps onto one of three
// categories at the C boundary: caller error (1), bad data (2), internal (3).
enum class Errc {
  invalid_argument,
  invalid_threshold,
  degenerate_box,
  empty_input,
  empty_corpus,
  empty_training,
  empty_vocabulary,
  point_out_of_bounds,
  out_of_bounds,
  zero_vector,
  dimension_mismatch,
  unknown_token,
  unknown_label,
  label_mismatch,
  single_class,
  too_few_records,
  insufficient_leaves,
  file_not_found,
  no_valid_records,
  vocabulary_mismatch,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

inline int error_category(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::invalid_threshold:
    case Errc::degenerate_box:
    case Errc::empty_input:
    case Errc::zero_vector:
    case Errc::dimension_mismatch:
    case Errc::unknown_token:
    case Errc::unknown_label:
    case Errc::label_mismatch:
      return 1;
    case Errc::empty_corpus:
    case Errc::empty_training:
    case Errc::empty_vocabulary:
    case Errc::point_out_of_bounds:
    case Errc::out_of_bounds:
    case Errc::single_class:
    case Errc::too_few_records:
    case Errc::insufficient_leaves:
    case Errc::file_not_found:
    case Errc::no_valid_records:
    case Errc::vocabulary_mismatch:
      return 2;
    case Errc::internal:
      return 3;
  }
  return 3;
}

}  // namespace geoinfer
