#include "tagsiege/errors.hpp"

namespace tagsiege {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::PlanInconsistency: return "plan-inconsistency";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::EmptyCorpus: return "empty-corpus";
    case ErrorKind::Config: return "config";
    case ErrorKind::Template: return "template";
    case ErrorKind::IsolatedNode: return "isolated-node";
    case ErrorKind::RetrievalExhausted: return "retrieval-exhausted";
    case ErrorKind::Index: return "index";
    case ErrorKind::Backend: return "backend";
    case ErrorKind::ResponseFormat: return "response-format";
    case ErrorKind::Training: return "training";
  }
  return "unknown";
}

}  // namespace tagsiege
