#pragma once

#include <stdexcept>
#include <string>

namespace g4dc {

// Error classes map 1:1 onto CLI exit codes and C API status values:
// validation = 2, format/corruption = 3, io = 4.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace g4dc
