#include "vrec/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "vrec/errors.hpp"

namespace vrec {

PredictedBox top1(const PredictedFrame& frame) {
  const PredictedBox* best = nullptr;
  for (const PredictedBox& b : frame.boxes) {
    if (best == nullptr || b.score.value_or(0.0) > best->score.value_or(0.0)) best = &b;
  }
  return best ? *best : PredictedBox{};
}

std::vector<ClipEvaluation> pair_clips(const AnnotationFile& annotations,
                                       const PredictionFile& predictions,
                                       std::vector<std::string>* warnings) {
  std::set<std::string> annotated;
  for (const auto& c : annotations.clips) annotated.insert(c.clip_id);
  std::vector<std::string> missing;
  for (const auto& c : predictions.clips) {
    if (!annotated.contains(c.clip_id)) missing.push_back(c.clip_id);
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::kMissingClip, "predicted clips are not annotated: " + ids);
  }

  std::vector<ClipEvaluation> out;
  for (const auto& ann : annotations.clips) {
    ClipEvaluation clip;
    clip.clip_id = ann.clip_id;
    clip.tags = ann.tags;
    const PredictedClip* pred = predictions.find(ann.clip_id);
    if (pred == nullptr && warnings) {
      warnings->push_back("clip " + ann.clip_id + " has no predictions; scored as all-Absent");
    }
    std::map<std::int64_t, const PredictedFrame*> by_frame;
    if (pred) {
      for (const auto& f : pred->frames) by_frame[f.frame_index] = &f;
    }
    for (const auto& f : ann.frames) {
      FrameRecord rec;
      rec.frame_index = f.frame_index;
      rec.gt = f.gt;
      if (auto it = by_frame.find(f.frame_index); it != by_frame.end()) {
        const PredictedBox best = top1(*it->second);
        rec.pred = best.box;
        rec.pred_score = best.score;
      }
      clip.frames.push_back(rec);
    }
    if (warnings && !clip.meets_dataset_minimum()) {
      warnings->push_back("clip " + ann.clip_id + " has fewer than four annotated target frames");
    }
    out.push_back(std::move(clip));
  }
  return out;
}

std::vector<ScoredLabel> roc_samples(const std::vector<ClipEvaluation>& clips) {
  std::vector<ScoredLabel> samples;
  for (const auto& clip : clips) {
    for (const auto& f : clip.frames) {
      const double score = f.pred.present() ? f.pred_score.value_or(0.0) : 0.0;
      samples.push_back({score, f.gt.present()});
    }
  }
  return samples;
}

namespace {

std::optional<std::string> group_key(const ClipTags& tags, GroupBy by) {
  if (by == GroupBy::kUniqueness) {
    if (!tags.uniqueness) return std::nullopt;
    return std::string(to_string(*tags.uniqueness));
  }
  if (!tags.movement) return std::nullopt;
  return std::string(to_string(*tags.movement));
}

}  // namespace

EvaluationReport evaluate_split(const std::vector<ClipEvaluation>& clips,
                                Aggregation aggregation, std::optional<GroupBy> group_by,
                                int threads) {
  std::vector<ClipMetrics> metrics(clips.size());
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1,
                              std::max<std::size_t>(clips.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < clips.size(); ++i) metrics[i] = clip_metrics(clips[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < clips.size(); i = next++) {
            metrics[i] = clip_metrics(clips[i]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::stable_sort(metrics.begin(), metrics.end(),
                   [](const ClipMetrics& a, const ClipMetrics& b) { return a.clip_id < b.clip_id; });

  EvaluationReport report;
  report.split = split_aggregate(metrics, aggregation);
  report.group_by = group_by;
  if (group_by) {
    std::map<std::string, std::vector<ClipMetrics>> buckets;
    for (const auto& m : metrics) {
      if (auto key = group_key(m.tags, *group_by)) buckets[*key].push_back(m);
    }
    for (const auto& [key, members] : buckets) {
      report.groups[key] = split_aggregate(members, aggregation);
    }
  }
  report.clips = std::move(metrics);
  return report;
}

Json to_json(const EvaluationReport& report) {
  Json clips = Json::array();
  for (const auto& c : report.clips) clips.push_back(to_json(c));
  Json j = {{"split", to_json(report.split)}, {"clips", clips}};
  if (report.group_by) {
    Json groups = Json::object();
    for (const auto& [key, r] : report.groups) groups[key] = to_json(r);
    j["group_by"] = *report.group_by == GroupBy::kUniqueness ? "uniqueness" : "movement";
    j["groups"] = groups;
  }
  return j;
}

}  // namespace vrec
