#include "topoflow/error.hpp"

namespace topoflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::NonOrthonormal: return "NonOrthonormal";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::CellTooSmall: return "CellTooSmall";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::MissingObjectTexture: return "MissingObjectTexture";
    case ErrorCode::MissingUVs: return "MissingUVs";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::AllForeground: return "AllForeground";
    case ErrorCode::NoVisibleHand: return "NoVisibleHand";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyVertices: return "EmptyVertices";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::TopologyMismatch: return "TopologyMismatch";
    case ErrorCode::FileNotFound: return "FileNotFound";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

bool Error::is_input_error() const noexcept {
  switch (code_) {
    case ErrorCode::ParseError:
    case ErrorCode::EmptyMesh:
    case ErrorCode::NonOrthonormal:
    case ErrorCode::BehindCamera:
    case ErrorCode::CellTooSmall:
    case ErrorCode::SizeMismatch:
    case ErrorCode::MissingObjectTexture:
    case ErrorCode::MissingUVs:
    case ErrorCode::AllForeground:
    case ErrorCode::NoVisibleHand:
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::EmptyInput:
    case ErrorCode::EmptyVertices:
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedPayload:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::SchemaError:
    case ErrorCode::TopologyMismatch:
    case ErrorCode::FileNotFound:
      return true;
    default:
      return false;
  }
}

}  // namespace topoflow
