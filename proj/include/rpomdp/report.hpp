#pragma once

// Specification strings, policy files and JSON result records.

#include "rpomdp/ccp.hpp"
#include "rpomdp/model.hpp"
#include "rpomdp/robust_verify.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rpomdp {

/// Parses `reach>=L@T` or `cost<=K@T`, where T is `target`, `goal` (the
/// model's labelled sets) or a comma-separated list of state indices.
/// Throws ValidationError on malformed input or invalid thresholds.
Specification parse_spec(std::string_view text, const IntervalPomdp& model);

struct RecordOptions {
    /// Wall-clock timings make records differ between otherwise identical runs.
    bool include_timings = true;
    std::string model_source;
};

/// JSON record of a synthesis run. Keys appear in a fixed order.
std::string result_record(const SynthesisResult& result, const IntervalPomdp& model,
                          const std::vector<Specification>& specs,
                          const RecordOptions& options = {});

/// JSON record of a stand-alone verification.
std::string verification_record(const CheckResult& check, const Policy& policy,
                                const IntervalPomdp& model,
                                const std::vector<Specification>& specs,
                                const RecordOptions& options = {});

/// Reads the `policy` table from a JSON document (a result record or a bare
/// {"policy": [[...], ...]} object). Throws ValidationError when missing or
/// malformed.
Policy read_policy(std::string_view json_text);

} // namespace rpomdp
