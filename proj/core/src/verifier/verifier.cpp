// Copyright 2026 The Lie-Sensor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "liesensor/verifier/verifier.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "liesensor/cnn/train.hpp"
#include "liesensor/error.hpp"

namespace liesensor::verifier {

namespace {

std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt_scores(const EmotionScores& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + fmt_real(s[i]);
  return out;
}

std::string quoted(const std::string& v) {
  if (v.empty()) return "-";
  if (v.find_first_of(" \t\"=") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

nlohmann::ordered_json scores_json(const EmotionScores& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (EmotionLabel l : kAllEmotions) j[std::string(to_string(l))] = s[index_of(l)];
  return j;
}

}  // namespace

std::string_view to_string(Verdict v) { return v == Verdict::Honest ? "Honest" : "Liar"; }

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "Honest") return Verdict::Honest;
  if (s == "Liar") return Verdict::Liar;
  return std::nullopt;
}

std::string VerificationResult::reason() const {
  std::string out;
  for (const auto& r : reasons) out += (out.empty() ? "" : "; ") + r;
  return out;
}

std::string VerificationResult::to_record() const {
  std::string out = "message_id=" + std::to_string(message_id);
  out += " timestamp=" + quoted(timestamp);
  out += " verdict=" + (verdict ? std::string(to_string(*verdict)) : std::string("-"));
  out += " text_label=" + (text_label ? std::string(to_string(*text_label)) : std::string("-"));
  out += " text_scores=" + (text_label ? fmt_scores(text_scores) : std::string("-"));
  out += " face_label=" + (face_label ? std::string(to_string(*face_label)) : std::string("-"));
  out += " face_scores=" + (face_label ? fmt_scores(face_scores) : std::string("-"));
  out += " face_box=";
  if (face_box) {
    out += std::to_string(face_box->x) + "," + std::to_string(face_box->y) + "," +
           std::to_string(face_box->w) + "," + std::to_string(face_box->h);
  } else {
    out += "-";
  }
  out += " reason=" + quoted(reason());
  return out;
}

nlohmann::ordered_json VerificationResult::to_json() const {
  using J = nlohmann::ordered_json;
  J j;
  j["message_id"] = message_id;
  j["timestamp"] = timestamp;
  j["verdict"] = verdict ? J(std::string(to_string(*verdict))) : J(nullptr);
  j["reason"] = reasons.empty() ? J(nullptr) : J(reason());
  j["text_label"] = text_label ? J(std::string(to_string(*text_label))) : J(nullptr);
  j["text_scores"] = text_label ? scores_json(text_scores) : J(nullptr);
  j["face_label"] = face_label ? J(std::string(to_string(*face_label))) : J(nullptr);
  j["face_scores"] = face_label ? scores_json(face_scores) : J(nullptr);
  if (face_box) {
    j["face_box"] = {{"x", face_box->x}, {"y", face_box->y}, {"w", face_box->w}, {"h", face_box->h}};
  } else {
    j["face_box"] = nullptr;
  }
  return j;
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms % 1000));
  return buf;
}

VerificationResult verify_message(std::string_view text, const vision::GrayImage* image,
                                  const ModelSet& models) {
  if (!models.text || !models.face || !models.cascade) {
    throw InvalidArgument("verify_message: models not loaded");
  }
  VerificationResult r;
  r.timestamp = utc_timestamp_now();

  if (const auto tp = models.text->predict(text)) {
    r.text_label = tp->label;
    r.text_scores = tp->scores;
  } else {
    r.reasons.emplace_back(kNoTextSignal);
  }

  if (!image || image->empty()) {
    r.reasons.emplace_back(kNoImage);
  } else {
    vision::DetectParams params = models.detect;
    params.largest_only = true;
    const auto boxes = vision::detect_faces(*image, *models.cascade, params);
    if (boxes.empty()) {
      r.reasons.emplace_back(kNoFace);
    } else {
      r.face_box = boxes.front();
      const auto& in = models.face->input_shape();
      const vision::GrayImage patch = vision::resample_bilinear(
          *image, *r.face_box, static_cast<int>(in[1]), static_cast<int>(in[0]));
      const cnn::FacePrediction fp = cnn::predict_face(*models.face, patch);
      r.face_label = fp.label;
      r.face_scores = fp.scores;
    }
  }

  if (r.text_label && r.face_label) r.verdict = compare_labels(*r.face_label, *r.text_label);
  return r;
}

nlohmann::ordered_json EvalReport::to_json() const {
  using J = nlohmann::ordered_json;
  J j;
  j["tp"] = tp;
  j["fp"] = fp;
  j["fn"] = fn;
  j["tn"] = tn;
  j["excluded"] = excluded;
  j["precision"] = precision ? J(*precision) : J(nullptr);
  j["recall"] = recall ? J(*recall) : J(nullptr);
  return j;
}

EvalReport evaluate(std::span<const EvalCase> cases) {
  if (cases.empty()) throw InvalidArgument("evaluate: no cases");
  EvalReport rep;
  for (const auto& c : cases) {
    if (!c.predicted) {
      ++rep.excluded;
      continue;
    }
    const bool pred_liar = *c.predicted == Verdict::Liar;
    const bool true_liar = c.truth == Verdict::Liar;
    if (pred_liar && true_liar) ++rep.tp;
    if (pred_liar && !true_liar) ++rep.fp;
    if (!pred_liar && true_liar) ++rep.fn;
    if (!pred_liar && !true_liar) ++rep.tn;
  }
  if (rep.tp + rep.fp > 0) rep.precision = static_cast<double>(rep.tp) / static_cast<double>(rep.tp + rep.fp);
  if (rep.tp + rep.fn > 0) rep.recall = static_cast<double>(rep.tp) / static_cast<double>(rep.tp + rep.fn);
  return rep;
}

}  // namespace liesensor::verifier
