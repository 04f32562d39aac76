#pragma once

#include <stdexcept>
#include <string>

namespace docrect {

/// Category of a failure. The CLI maps each kind onto a process exit code.
enum class ErrorKind {
  parameter,   // invalid argument value (K = 0, tau outside (0,1), empty input)
  shape,       // incompatible or unsupported dimensions
  semantics,   // wrong flow direction or coordinate units
  format,      // malformed file or byte stream
  manifest,    // weight container does not match the layer manifest
  conversion,  // forward->backward conversion failed
  internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::shape: return "shape";
    case ErrorKind::semantics: return "semantics";
    case ErrorKind::format: return "format";
    case ErrorKind::manifest: return "manifest";
    case ErrorKind::conversion: return "conversion";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& what) : Error(ErrorKind::parameter, what) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};
struct SemanticsError : Error {
  explicit SemanticsError(const std::string& what) : Error(ErrorKind::semantics, what) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error(ErrorKind::format, what) {}
};
struct ManifestError : Error {
  explicit ManifestError(const std::string& what) : Error(ErrorKind::manifest, what) {}
};
struct ConversionError : Error {
  explicit ConversionError(const std::string& what) : Error(ErrorKind::conversion, what) {}
};

}  // namespace docrect
