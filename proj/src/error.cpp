#include "utilenhance/error.hpp"

namespace utilenhance {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::UnsupportedDepth: return "UnsupportedDepth";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::DuplicateCorrection: return "DuplicateCorrection";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace utilenhance
