#pragma once

#include <string>

#include "gbboost/boosting.hpp"

namespace gbb {

// Versioned structured-text ensemble format. Floating-point fields are
// written as hexfloats so save -> load -> predict is bit-identical.
std::string serialize_ensemble(const TrainedEnsemble& ens);
TrainedEnsemble parse_ensemble(const std::string& text);

// File variants; save writes to <path>.tmp then renames into place.
void save_ensemble(const std::string& path, const TrainedEnsemble& ens);
TrainedEnsemble load_ensemble(const std::string& path);

}  // namespace gbb
