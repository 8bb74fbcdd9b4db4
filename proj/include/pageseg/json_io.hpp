#pragma once

#include <nlohmann/json_fwd.hpp>

#include "pageseg/featmap.hpp"
#include "pageseg/imaging.hpp"
#include "pageseg/model.hpp"
#include "pageseg/network.hpp"
#include "pageseg/pairgen.hpp"
#include "pageseg/segment.hpp"
#include "pageseg/synthdoc.hpp"

namespace pageseg {

void to_json(nlohmann::json& j, const PatchGeometry& g);
void from_json(const nlohmann::json& j, PatchGeometry& g);
void to_json(nlohmann::json& j, const ComponentStats& s);
void from_json(const nlohmann::json& j, ComponentStats& s);
void to_json(nlohmann::json& j, const BinarizeOptions& o);
void from_json(const nlohmann::json& j, BinarizeOptions& o);
void to_json(nlohmann::json& j, const SamplerConfig& c);
void from_json(const nlohmann::json& j, SamplerConfig& c);
void to_json(nlohmann::json& j, const ConvSpec& c);
void from_json(const nlohmann::json& j, ConvSpec& c);
void to_json(nlohmann::json& j, const Architecture& a);
void from_json(const nlohmann::json& j, Architecture& a);
void to_json(nlohmann::json& j, const TrainingConfig& c);
void from_json(const nlohmann::json& j, TrainingConfig& c);
void to_json(nlohmann::json& j, const SlidingConfig& c);
void from_json(const nlohmann::json& j, SlidingConfig& c);
void to_json(nlohmann::json& j, const SegmentationConfig& c);
void from_json(const nlohmann::json& j, SegmentationConfig& c);
void to_json(nlohmann::json& j, const BoundingBox& b);
void from_json(const nlohmann::json& j, BoundingBox& b);
void to_json(nlohmann::json& j, const SynthLayout& l);
void from_json(const nlohmann::json& j, SynthLayout& l);
void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

}  // namespace pageseg
