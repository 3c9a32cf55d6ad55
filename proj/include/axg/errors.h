#pragma once

#include <stdexcept>
#include <string>

namespace axg {

// Shape or channel disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Audio too short for the encoder's receptive field.
class LengthError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Violated precondition that is not a shape problem (empty dataset, non-scalar loss, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Unsupported or corrupt binary file (WAV, checkpoint).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed JSON document (report, manifest, config).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Run configuration that fails schema validation (unknown key, wrong type, bad value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingCheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace axg
