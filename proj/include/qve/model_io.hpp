#pragma once

#include <string>

#include "qve/model.hpp"

namespace qve {

// Model JSON: {"n": int, "weights": [..], "a": [..], "s": [[..]]} or the
// ensemble shorthand {"n": int, "kernel": {"type": "constant"|"block"|
// "deformed"|"translation_invariant", ...}}.
QveModel model_from_json(const std::string& text);
QveModel load_model_file(const std::string& path);
std::string model_to_json(const QveModel& model);

}  // namespace qve
