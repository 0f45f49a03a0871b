#pragma once

#include <iosfwd>
#include <string>

#include "tart/model.hpp"

namespace tart {

// Versioned JSON model file. All parameter arrays are stored row-major with
// round-trip decimal precision, so a saved and reloaded model reproduces
// bit-identical predictions. Schema documented in the README.
void save_model(const TartModel& m, std::ostream& out);
void save_model(const TartModel& m, const std::string& path);

TartModel load_model(std::istream& in);
TartModel load_model(const std::string& path);

} // namespace tart
