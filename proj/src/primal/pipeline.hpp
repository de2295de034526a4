#pragma once

#include <map>
#include <string>

#include "primal/config.hpp"
#include "primal/synth.hpp"

namespace primal {

// Runs synth -> train all four models -> score validation/test -> fit
// fusion on validation -> fuse test -> evaluate everything, writing each
// artifact under out_dir. Returns the relative file names and their bytes
// (also written to disk), which is what the determinism check compares.
// Every byte written is a pure function of (spec, config, seed).
std::map<std::string, std::string> run_pipeline(const SynthSpec& spec, const RunConfig& config,
                                                uint64_t seed, const std::string& out_dir);

}  // namespace primal
