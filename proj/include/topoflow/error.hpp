#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topoflow {

enum class ErrorCode {
  ParseError,
  EmptyMesh,
  NonOrthonormal,
  BehindCamera,
  CellTooSmall,
  DegenerateTriangle,
  IndexOutOfRange,
  SizeMismatch,
  MissingObjectTexture,
  MissingUVs,
  LayoutMismatch,
  AllForeground,
  NoVisibleHand,
  DegenerateConfiguration,
  EmptyInput,
  EmptyVertices,
  IoError,
  BadMagic,
  TruncatedPayload,
  UnsupportedVersion,
  SchemaError,
  TopologyMismatch,
  FileNotFound,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
// what() is "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  // True for errors caused by bad user input (exit code 2 in the CLI).
  bool is_input_error() const noexcept;

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace topoflow
