#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "loopdom/fixtures.hpp"
#include "loopdom/model.hpp"

namespace testing {

inline loopdom::Model parse_ok(std::string_view text) {
  auto r = loopdom::parse_model(text);
  if (!r.ok()) {
    std::string msg = "parse failed:";
    for (const auto& d : r.diagnostics) msg += "\n  " + loopdom::format(d);
    throw std::runtime_error(msg);
  }
  return std::move(*r.model);
}

inline loopdom::Model fixture_model(std::string_view name) {
  return parse_ok(loopdom::find_fixture(name)->text);
}

}  // namespace testing
