#pragma once

#include <memory>
#include <string>

#include "beamtune/distribution.hpp"

namespace beamtune {

// Versioned binary model persistence.  Layout: magic bytes "BTMD", a format
// version, a model-kind byte, the embedded vocabulary, then the kind-specific
// payload, all little-endian.  load(save(m)) is behaviorally identical to m
// (identical next_logprobs on all inputs), and saving is deterministic:
// training the same model twice yields byte-identical files.
void save_model(const ConditionalModel& model, const std::string& path);
std::unique_ptr<ConditionalModel> load_model(const std::string& path);

}  // namespace beamtune
