#pragma once

#include <vector>

#include "loopdom/model.hpp"

namespace loopdom {

/// Name resolution and per-kind reference rules shared by parse_model and
/// validate. Appends errors and warnings.
void check_semantics(const std::vector<Variable>& vars, std::vector<Diagnostic>& diags);

}  // namespace loopdom
