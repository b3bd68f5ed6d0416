#include "embloc/query.hpp"

#include "embloc/error.hpp"

namespace embloc {

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::Touchable: return "touchable";
    case Family::DirOnly: return "dir_only";
    case Family::DirOffset: return "dir_offset";
    case Family::BodyLength: return "body_length";
    case Family::Between: return "between";
    case Family::BetweenOffset: return "between_offset";
  }
  return "unknown";
}

Family family_from_string(std::string_view s) {
  for (Family f : kAllFamilies) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorCode::Format, "unknown query family '" + std::string(s) + "'");
}

void Query::validate() const {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::Format, "query " + id + ": " + why); };
  if (instruction.empty()) fail("empty instruction");
  if (family == Family::Touchable) {
    if (refs.size() != 1) fail("touchable queries reference exactly one object");
    if (direction_code || offset) fail("touchable queries carry no direction or offset");
    if (!gt.mask_object || gt.mask_object->empty()) fail("touchable ground truth needs a mask object");
    return;
  }
  const std::size_t want_refs = is_between(family) ? 2 : 1;
  if (refs.size() != want_refs) fail("wrong number of referenced objects");
  if (gt.anchors != refs) fail("ground-truth anchors must match refs");
  if (gt.anchor_centers.size() != refs.size()) fail("missing anchor centers");
  if (is_between(family)) {
    if (direction_code || gt.direction_code) fail("between queries carry no direction");
  } else {
    if (!direction_code || gt.direction_code != direction_code) fail("direction queries need a direction");
  }
  if (has_metric(family)) {
    if (!offset || !gt.offset || !gt.r_star_mm) fail("offset families need an offset and r*");
    if (*gt.r_star_mm < 0 || gt.offset->value < 0) fail("negative offset");
    if ((family == Family::BodyLength) != (offset->kind == OffsetSpec::Kind::BodyLengths)) {
      fail("offset kind does not match the family");
    }
  } else if (offset || gt.offset || gt.r_star_mm) {
    fail("family carries no offset");
  }
}

nlohmann::ordered_json to_json(const Query& q) {
  nlohmann::ordered_json j;
  j["id"] = q.id;
  j["family"] = to_string(q.family);
  j["image"] = q.image;
  j["depth"] = q.depth;
  j["intrinsics"] = q.intrinsics;
  j["detections"] = q.detections;
  j["instruction"] = q.instruction;
  j["refs"] = q.refs;
  if (q.direction_code) j["direction_code"] = *q.direction_code;
  if (q.offset) j["offset"] = to_json(*q.offset);
  j["answer_text"] = q.answer_text;

  nlohmann::ordered_json gt = nlohmann::ordered_json::object();
  if (q.gt.mask_object) gt["mask_object"] = *q.gt.mask_object;
  if (!q.gt.anchors.empty()) {
    gt["anchors"] = q.gt.anchors;
    auto centers = nlohmann::ordered_json::array();
    for (const auto& c : q.gt.anchor_centers) centers.push_back({c.x, c.y, c.z});
    gt["anchor_centers"] = centers;
  }
  if (q.gt.direction_code) gt["direction_code"] = *q.gt.direction_code;
  if (q.gt.offset) gt["offset"] = to_json(*q.gt.offset);
  if (q.gt.r_star_mm) gt["r_star_mm"] = *q.gt.r_star_mm;
  j["gt"] = gt;
  return j;
}

Query query_from_json(const nlohmann::json& j) {
  Query q;
  try {
    q.id = j.at("id").get<std::string>();
    q.family = family_from_string(j.at("family").get<std::string>());
    q.image = j.value("image", std::string());
    q.depth = j.at("depth").get<std::string>();
    q.intrinsics = j.at("intrinsics").get<std::string>();
    q.detections = j.at("detections").get<std::string>();
    q.instruction = j.at("instruction").get<std::string>();
    q.refs = j.at("refs").get<std::vector<std::string>>();
    if (j.contains("direction_code")) q.direction_code = j.at("direction_code").get<int>();
    if (j.contains("offset")) q.offset = offset_from_json(j.at("offset"));
    q.answer_text = j.at("answer_text").get<std::string>();
    const auto& gt = j.at("gt");
    if (gt.contains("mask_object")) q.gt.mask_object = gt.at("mask_object").get<std::string>();
    if (gt.contains("anchors")) q.gt.anchors = gt.at("anchors").get<std::vector<std::string>>();
    if (gt.contains("anchor_centers")) {
      for (const auto& c : gt.at("anchor_centers")) {
        q.gt.anchor_centers.push_back({c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
      }
    }
    if (gt.contains("direction_code")) q.gt.direction_code = gt.at("direction_code").get<int>();
    if (gt.contains("offset")) q.gt.offset = offset_from_json(gt.at("offset"));
    if (gt.contains("r_star_mm")) q.gt.r_star_mm = gt.at("r_star_mm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("query: ") + e.what());
  }
  if (q.direction_code) direction_from_code(*q.direction_code);
  q.validate();
  return q;
}

std::string serialize_query(const Query& q) { return to_json(q).dump(); }

}  // namespace embloc
