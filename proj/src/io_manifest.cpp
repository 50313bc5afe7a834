// Copyright 2026 The countbench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "countbench/errors.hpp"
#include "countbench/io.hpp"

namespace countbench::io {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw IoError("error writing " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_text(const fs::path& path, std::string_view text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// --- manifest --------------------------------------------------------------

Json manifest_to_json(const Manifest& m) {
  Json entries = Json::array();
  for (const ManifestEntry& e : m.entries) {
    Json j;
    j["image_id"] = e.image_id;
    j["image_path"] = e.image_path;
    j["class_name"] = e.class_name;
    j["gt_count"] = e.gt_count;
    if (e.points) {
      Json pts = Json::array();
      for (const Point& p : *e.points) pts.push_back({p.x, p.y});
      j["points"] = std::move(pts);
    }
    j["class_count_in_image"] = e.class_count_in_image;
    entries.push_back(std::move(j));
  }
  Json out;
  out["split"] = m.split_name;
  if (!m.source_note.empty()) out["source_note"] = m.source_note;
  out["entries"] = std::move(entries);
  return out;
}

namespace {

[[noreturn]] void schema_error(const std::string& source, std::size_t index, const std::string& what) {
  throw InputError(source + ": entry " + std::to_string(index) + ": " + what);
}

const Json& require(const Json& obj, const char* key, const std::string& source, std::size_t index) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(source, index, std::string("missing field ") + key);
  return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& source, std::size_t index) {
  const Json& v = require(obj, key, source, index);
  if (!v.is_string()) schema_error(source, index, std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::uint64_t require_uint(const Json& v, const char* key, const std::string& source, std::size_t index) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    schema_error(source, index, std::string(key) + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(source + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace

Manifest manifest_from_json(const Json& j, const std::string& source) {
  if (!j.is_object()) throw InputError(source + ": manifest must be a JSON object");
  Manifest m;
  if (auto it = j.find("split"); it != j.end()) {
    if (!it->is_string()) throw InputError(source + ": split must be a string");
    m.split_name = it->get<std::string>();
  }
  if (auto it = j.find("source_note"); it != j.end()) {
    if (!it->is_string()) throw InputError(source + ": source_note must be a string");
    m.source_note = it->get<std::string>();
  }
  auto entries = j.find("entries");
  if (entries == j.end() || !entries->is_array()) throw InputError(source + ": entries must be an array");

  for (std::size_t i = 0; i < entries->size(); ++i) {
    const Json& ej = (*entries)[i];
    if (!ej.is_object()) schema_error(source, i, "must be an object");
    ManifestEntry e;
    e.image_id = require_string(ej, "image_id", source, i);
    e.image_path = require_string(ej, "image_path", source, i);
    e.class_name = require_string(ej, "class_name", source, i);
    e.gt_count = require_uint(require(ej, "gt_count", source, i), "gt_count", source, i);
    if (auto it = ej.find("points"); it != ej.end() && !it->is_null()) {
      if (!it->is_array()) schema_error(source, i, "points must be an array of [x, y]");
      std::vector<Point> pts;
      pts.reserve(it->size());
      for (const Json& p : *it) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          schema_error(source, i, "points must be an array of [x, y]");
        }
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      e.points = std::move(pts);
    }
    if (auto it = ej.find("class_count_in_image"); it != ej.end() && !it->is_null()) {
      const std::uint64_t n = require_uint(*it, "class_count_in_image", source, i);
      if (n > UINT32_MAX) schema_error(source, i, "class_count_in_image out of range");
      e.class_count_in_image = std::uint32_t(n);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  const std::string source = path.string();
  Manifest m = manifest_from_json(parse_json(read_text(path), source), source);
  const auto violations = validate_manifest(m);
  if (!violations.empty()) {
    std::string msg = source + ": invalid manifest:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw InputError(msg);
  }
  return m;
}

void save_manifest(const Manifest& m, const fs::path& path) { write_text(path, manifest_to_json(m).dump(2) + "\n"); }

// --- FSC-147 ---------------------------------------------------------------

Manifest convert_fsc147(const Fsc147Sources& src) {
  const Json annotations = parse_json(read_text(src.annotations), src.annotations.string());
  const Json splits = parse_json(read_text(src.splits), src.splits.string());

  std::unordered_map<std::string, std::string> class_of;
  {
    std::istringstream in(read_text(src.classes));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw InputError(src.classes.string() + ":" + std::to_string(line_no) + ": expected 'image<TAB>class'");
      }
      class_of[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }

  std::unordered_map<std::string, std::uint32_t> class_counts;
  if (src.class_counts) {
    std::istringstream in(read_text(*src.class_counts));
    std::string name;
    long long n = 0;
    std::size_t line_no = 0;
    while (in >> name >> n) {
      ++line_no;
      if (n < 1) throw InputError(src.class_counts->string() + ": entry " + std::to_string(line_no) + ": count must be >= 1");
      class_counts[name] = std::uint32_t(n);
    }
  }

  auto split = splits.find(src.split);
  if (split == splits.end() || !split->is_array()) {
    throw InputError(src.splits.string() + ": no split named '" + src.split + "'");
  }

  Manifest m;
  m.split_name = src.split;
  m.source_note = std::string(kFsc147ConverterVersion) + " from " + src.annotations.filename().string();
  for (const Json& name_json : *split) {
    const std::string file = name_json.get<std::string>();
    auto ann = annotations.find(file);
    if (ann == annotations.end()) throw InputError(src.annotations.string() + ": no annotation for " + file);
    auto cls = class_of.find(file);
    if (cls == class_of.end()) throw InputError(src.classes.string() + ": no class for " + file);

    ManifestEntry e;
    e.image_id = fs::path(file).stem().string();
    e.image_path = (fs::path(src.image_prefix) / file).generic_string();
    e.class_name = cls->second;
    std::vector<Point> pts;
    for (const Json& p : ann->at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    e.gt_count = pts.size();
    e.points = std::move(pts);
    if (auto it = class_counts.find(file); it != class_counts.end()) e.class_count_in_image = it->second;
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace countbench::io
