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

#include <cmath>
#include <cstdio>

#include "countbench/errors.hpp"
#include "countbench/io.hpp"

namespace countbench::io {

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  if (text == "markdown" || text == "md") return ReportFormat::markdown;
  throw ConfigError("unknown report format '" + std::string(text) + "'");
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> read_optional(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::string fixed(const std::optional<double>& v, int decimals, const char* missing) {
  if (!v) return missing;
  char buf[64];
  // Adding 0.0 turns a negative zero into a positive one.
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v + 0.0);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Table columns in display order: metric name, decimals, arrow.
struct Column {
  const char* name;
  std::optional<double> MetricsReport::*field;
  int decimals;
  const char* arrow;
};

constexpr Column kColumns[] = {
    {"NMN", &MetricsReport::nmn, 2, "↓"},   {"PCCN", &MetricsReport::pccn, 2, "↑"},
    {"CntP", &MetricsReport::cnt_p, 3, "↑"}, {"CntR", &MetricsReport::cnt_r, 3, "↑"},
    {"CntF1", &MetricsReport::cnt_f1, 3, "↑"}, {"MAE", &MetricsReport::mae, 2, "↓"},
    {"RMSE", &MetricsReport::rmse, 2, "↓"},
};

std::optional<double> drift_field(const MetricsReport& r, double DriftSummary::*field) {
  if (!r.drift || r.drift->n == 0) return std::nullopt;
  return (*r.drift).*field;
}

std::string format_csv(std::span<const MetricsReport> reports) {
  std::string out = "model";
  for (const Column& c : kColumns) out += std::string(",") + c.name;
  out +=
      ",CntF1_aggregate,drift_n,drift_mean,drift_median,drift_q1,drift_q3,drift_whisker_low,drift_whisker_high,"
      "drift_outliers,n_images,n_jobs_scored,unmatched,orphans,config_fingerprint\n";
  for (const MetricsReport& r : reports) {
    out += csv_field(r.model);
    for (const Column& c : kColumns) out += "," + fixed(r.*(c.field), c.decimals, "");
    out += "," + fixed(r.cnt_f1_aggregate, 3, "");
    out += "," + (r.drift ? std::to_string(r.drift->n) : std::string{});
    for (auto field : {&DriftSummary::mean, &DriftSummary::median, &DriftSummary::q1, &DriftSummary::q3,
                       &DriftSummary::whisker_low, &DriftSummary::whisker_high}) {
      out += "," + fixed(drift_field(r, field), 3, "");
    }
    out += "," + (r.drift ? std::to_string(r.drift->outliers.size()) : std::string{});
    out += "," + std::to_string(r.n_images) + "," + std::to_string(r.n_jobs_scored) + "," +
           std::to_string(r.unmatched) + "," + std::to_string(r.orphans) + "," + csv_field(r.config_fingerprint) +
           "\n";
  }
  return out;
}

std::string format_markdown(std::span<const MetricsReport> reports) {
  std::string out = "| Method |";
  for (const Column& c : kColumns) out += std::string(" ") + c.name + " " + c.arrow + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < std::size(kColumns); ++i) out += "---:|";
  out += "\n";
  for (const MetricsReport& r : reports) {
    out += "| " + r.model + " |";
    for (const Column& c : kColumns) out += " " + fixed(r.*(c.field), c.decimals, "-") + " |";
    out += "\n";
  }
  for (const MetricsReport& r : reports) {
    out += "\n### " + r.model + "\n\n";
    out += "- cnt_f1_aggregate: " + fixed(r.cnt_f1_aggregate, 3, "-") + "\n";
    if (r.drift) {
      const DriftSummary& d = *r.drift;
      out += "- drift: n=" + std::to_string(d.n) + " mean=" + fixed(d.mean, 3, "") + " median=" +
             fixed(d.median, 3, "") + " q1=" + fixed(d.q1, 3, "") + " q3=" + fixed(d.q3, 3, "") + " whiskers=[" +
             fixed(d.whisker_low, 3, "") + ", " + fixed(d.whisker_high, 3, "") + "] outliers=" +
             std::to_string(d.outliers.size()) + " skipped=" + std::to_string(d.skipped.size()) + "\n";
    }
    out += "- images: " + std::to_string(r.n_images) + "\n";
    out += "- jobs scored: " + std::to_string(r.n_jobs_scored) + "\n";
    out += "- unmatched: " + std::to_string(r.unmatched) + "\n";
    out += "- orphans: " + std::to_string(r.orphans) + "\n";
    out += "- config_fingerprint: " + r.config_fingerprint + "\n";
    for (const auto& note : r.notes) out += "- note: " + note + "\n";
  }
  return out;
}

Json drift_to_json(const DriftSummary& d) {
  Json j;
  j["n"] = d.n;
  j["mean"] = d.mean;
  j["median"] = d.median;
  j["q1"] = d.q1;
  j["q3"] = d.q3;
  j["whisker_low"] = d.whisker_low;
  j["whisker_high"] = d.whisker_high;
  Json outliers = Json::array();
  for (const auto& o : d.outliers) outliers.push_back({{"pos_image_id", o.pos_image_id}, {"neg_image_id", o.neg_image_id}, {"drift", o.value}});
  j["outliers"] = std::move(outliers);
  Json skipped = Json::array();
  for (const auto& s : d.skipped) skipped.push_back({{"pos_image_id", s.pos_image_id}, {"neg_image_id", s.neg_image_id}});
  j["skipped"] = std::move(skipped);
  return j;
}

DriftSummary drift_from_json(const Json& j) {
  DriftSummary d;
  d.n = j.at("n").get<std::uint64_t>();
  d.mean = j.at("mean").get<double>();
  d.median = j.at("median").get<double>();
  d.q1 = j.at("q1").get<double>();
  d.q3 = j.at("q3").get<double>();
  d.whisker_low = j.at("whisker_low").get<double>();
  d.whisker_high = j.at("whisker_high").get<double>();
  for (const Json& o : j.at("outliers")) {
    d.outliers.push_back({o.at("pos_image_id").get<std::string>(), o.at("neg_image_id").get<std::string>(),
                          o.at("drift").get<double>()});
  }
  for (const Json& s : j.at("skipped")) {
    d.skipped.push_back({s.at("pos_image_id").get<std::string>(), s.at("neg_image_id").get<std::string>()});
  }
  return d;
}

}  // namespace

Json report_to_json(const MetricsReport& r) {
  Json j;
  j["model"] = r.model;
  j["nmn"] = optional_number(r.nmn);
  j["pccn"] = optional_number(r.pccn);
  j["cnt_p"] = optional_number(r.cnt_p);
  j["cnt_r"] = optional_number(r.cnt_r);
  j["cnt_f1"] = optional_number(r.cnt_f1);
  j["cnt_f1_aggregate"] = optional_number(r.cnt_f1_aggregate);
  j["mae"] = optional_number(r.mae);
  j["rmse"] = optional_number(r.rmse);
  j["drift"] = r.drift ? drift_to_json(*r.drift) : Json(nullptr);
  j["n_images"] = r.n_images;
  j["n_jobs_scored"] = r.n_jobs_scored;
  j["unmatched"] = r.unmatched;
  j["orphans"] = r.orphans;
  j["config_fingerprint"] = r.config_fingerprint;
  j["notes"] = r.notes;
  return j;
}

MetricsReport report_from_json(const Json& j) {
  try {
    MetricsReport r;
    r.model = j.at("model").get<std::string>();
    r.nmn = read_optional(j, "nmn");
    r.pccn = read_optional(j, "pccn");
    r.cnt_p = read_optional(j, "cnt_p");
    r.cnt_r = read_optional(j, "cnt_r");
    r.cnt_f1 = read_optional(j, "cnt_f1");
    r.cnt_f1_aggregate = read_optional(j, "cnt_f1_aggregate");
    r.mae = read_optional(j, "mae");
    r.rmse = read_optional(j, "rmse");
    if (auto it = j.find("drift"); it != j.end() && !it->is_null()) r.drift = drift_from_json(*it);
    r.n_images = j.at("n_images").get<std::uint64_t>();
    r.n_jobs_scored = j.at("n_jobs_scored").get<std::uint64_t>();
    r.unmatched = j.at("unmatched").get<std::uint64_t>();
    r.orphans = j.at("orphans").get<std::uint64_t>();
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

std::string format_report(std::span<const MetricsReport> reports, ReportFormat format) {
  switch (format) {
    case ReportFormat::csv:
      return format_csv(reports);
    case ReportFormat::markdown:
      return format_markdown(reports);
    case ReportFormat::json:
      break;
  }
  if (reports.size() == 1) return report_to_json(reports[0]).dump(2) + "\n";
  Json all = Json::array();
  for (const auto& r : reports) all.push_back(report_to_json(r));
  return all.dump(2) + "\n";
}

void write_report(const MetricsReport& r, ReportFormat format, const fs::path& path) {
  write_text(path, format_report(std::span(&r, 1), format));
}

MetricsReport read_report_json(const fs::path& path) {
  try {
    return report_from_json(Json::parse(read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": malformed JSON at byte " + std::to_string(e.byte));
  }
}

std::string drift_to_csv(const DriftSummary& d) {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out = "statistic,value\n";
  out += "n," + std::to_string(d.n) + "\n";
  out += "mean," + num(d.mean) + "\n";
  out += "median," + num(d.median) + "\n";
  out += "q1," + num(d.q1) + "\n";
  out += "q3," + num(d.q3) + "\n";
  out += "whisker_low," + num(d.whisker_low) + "\n";
  out += "whisker_high," + num(d.whisker_high) + "\n";
  out += "outliers," + std::to_string(d.outliers.size()) + "\n";
  out += "skipped," + std::to_string(d.skipped.size()) + "\n";
  out += "\npos_image_id,neg_image_id,drift\n";
  for (const auto& o : d.outliers) {
    out += csv_field(o.pos_image_id) + "," + csv_field(o.neg_image_id) + "," + num(o.value) + "\n";
  }
  return out;
}

}  // namespace countbench::io
