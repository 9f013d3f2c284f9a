#pragma once

#include <filesystem>
#include <string>

#include "soliton_forge/measures.hpp"

namespace soliton_forge {

// Measure files are JSON:
//   {"name": "...", "atoms": [{"kappa": k, "weight": w}],
//    "densities": [{"form": "condensate" | "uniform" | "table",
//                   "support": [a, b], "params": {...}, "sign": 1 | -1}]}
// params: condensate {"h", optional "scale"}, uniform {"value"},
// table {"k": [...], "value": [...]}.

/// Throws Error(measure_parse_error) naming the offending field; the parsed
/// measure is also run through validate().
SpectralMeasure parse_measure(const std::string& json_text);
SpectralMeasure load_measure(const std::filesystem::path& path);

std::string measure_to_json(const SpectralMeasure& m);

}  // namespace soliton_forge
