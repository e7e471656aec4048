#pragma once

#include <filesystem>

#include "json.hpp"
#include "slicer/channel.hpp"
#include "slicer/codec.hpp"
#include "slicer/planner.hpp"
#include "slicer/profile.hpp"
#include "slicer/sim.hpp"

namespace slicer {

using Json = nlohmann::ordered_json;

/// Parses a JSON file. Throws IoError if unreadable and FormatError if the
/// text is not JSON.
Json read_json(const std::filesystem::path& path);
void write_json(const Json& doc, const std::filesystem::path& path);

// Readers throw InvalidArgument on missing keys, wrong types or values
// rejected by the corresponding validate().

ModelProfile profile_from_json(const Json& doc);
Json profile_to_json(const ModelProfile& profile);
ModelProfile load_profile(const std::filesystem::path& path);

ChannelParams channel_from_json(const Json& doc);
Json channel_to_json(const ChannelParams& ch);

/// Absent budgets are unbounded. An embedded "channel" object is optional.
Constraints constraints_from_json(const Json& doc);

DeviceTimeModel time_model_from_json(const Json& doc);

CodecConfig codec_from_json(const Json& doc, const CodecConfig& defaults = {});
Json codec_to_json(const CodecConfig& cfg);

SearchGrids grids_from_json(const Json& doc);

/// Relative "profile" / "time_model" paths resolve against base_dir.
SimConfig sim_config_from_json(const Json& doc, const std::filesystem::path& base_dir);
SimConfig load_sim_config(const std::filesystem::path& path);

Json plan_to_json(const SplitPlan& plan);
Json sim_report_to_json(const SimReport& report);
Json comparison_to_json(const PolicyComparison& cmp);

}  // namespace slicer
