#include "vrec/metrics.hpp"

#include <algorithm>
#include <set>

#include "vrec/errors.hpp"

namespace vrec {

double iou_plus_n(const BBox2D& pred, const BBox2D& gt) {
  if (!pred.present() && !gt.present()) return 1.0;
  return iou(pred, gt);
}

void ClipEvaluation::validate() const {
  if (frames.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "clip has no frames", clip_id);
  }
  std::set<std::int64_t> seen;
  for (const auto& frame : frames) {
    if (frame.frame_index < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative frame index", clip_id);
    }
    if (!seen.insert(frame.frame_index).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate frame index " + std::to_string(frame.frame_index),
                  clip_id);
    }
  }
}

std::size_t ClipEvaluation::target_frame_count() const {
  return static_cast<std::size_t>(std::count_if(
      frames.begin(), frames.end(),
      [](const FrameRecord& f) { return f.gt.present(); }));
}

StiouResult stiou(const ClipEvaluation& clip) {
  double inter = 0.0;
  double uni = 0.0;
  for (const auto& frame : clip.frames) {
    inter += intersection_area(frame.pred, frame.gt);
    uni += union_area(frame.pred, frame.gt);
  }
  if (uni <= 0.0) return {1.0, true};
  return {inter / uni, false};
}

ClipMetrics clip_metrics(const ClipEvaluation& clip) {
  clip.validate();
  ClipMetrics m;
  m.clip_id = clip.clip_id;
  m.tags = clip.tags;
  const StiouResult st = stiou(clip);
  m.stiou = st.value;
  m.stiou_vacuous = st.vacuous;

  for (const auto& frame : clip.frames) {
    const double v = iou_plus_n(frame.pred, frame.gt);
    ++m.n_frames;
    m.sum_iou_plus_n += v;
    if (v > kApIouThreshold) ++m.hits_plus_n;
    if (frame.gt.present()) {
      ++m.n_target_frames;
      m.sum_iou += v;
      if (v > kApIouThreshold) ++m.hits;
    }
  }
  const auto n = static_cast<double>(m.n_frames);
  m.mean_iou_plus_n = m.sum_iou_plus_n / n;
  m.ap50_plus_n = static_cast<double>(m.hits_plus_n) / n;
  if (m.n_target_frames > 0) {
    const auto nm = static_cast<double>(m.n_target_frames);
    m.mean_iou = m.sum_iou / nm;
    m.ap50 = static_cast<double>(m.hits) / nm;
  }
  return m;
}

SplitReport split_aggregate(std::span<const ClipMetrics> clips,
                            Aggregation aggregation) {
  if (clips.empty()) {
    throw Error(ErrorCode::kEmptySplit, "no clips to aggregate");
  }
  std::vector<const ClipMetrics*> ordered;
  ordered.reserve(clips.size());
  for (const auto& c : clips) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ClipMetrics* a, const ClipMetrics* b) {
                     return a->clip_id < b->clip_id;
                   });

  SplitReport r;
  r.aggregation = aggregation;
  r.n_clips = ordered.size();

  double stiou_sum = 0.0;
  double iou_n_sum = 0.0, ap_n_sum = 0.0;
  double iou_sum = 0.0, ap_sum = 0.0;
  std::size_t clips_with_target = 0;
  double pooled_iou = 0.0, pooled_iou_n = 0.0;
  std::size_t pooled_hits = 0, pooled_hits_n = 0;

  for (const ClipMetrics* c : ordered) {
    stiou_sum += c->stiou;
    iou_n_sum += c->mean_iou_plus_n;
    ap_n_sum += c->ap50_plus_n;
    if (c->mean_iou) {
      iou_sum += *c->mean_iou;
      ap_sum += *c->ap50;
      ++clips_with_target;
    }
    pooled_iou += c->sum_iou;
    pooled_iou_n += c->sum_iou_plus_n;
    pooled_hits += c->hits;
    pooled_hits_n += c->hits_plus_n;
    r.n_images += c->n_frames;
    r.n_images_with_target += c->n_target_frames;
    if (c->stiou_vacuous) ++r.n_vacuous_clips;
  }

  const auto n_clips = static_cast<double>(r.n_clips);
  r.mstiou = stiou_sum / n_clips;
  if (aggregation == Aggregation::kClipMean) {
    r.miou_plus_n = iou_n_sum / n_clips;
    r.map50_plus_n = ap_n_sum / n_clips;
    if (clips_with_target > 0) {
      r.miou = iou_sum / static_cast<double>(clips_with_target);
      r.map50 = ap_sum / static_cast<double>(clips_with_target);
    }
  } else {
    const auto n_images = static_cast<double>(r.n_images);
    r.miou_plus_n = pooled_iou_n / n_images;
    r.map50_plus_n = static_cast<double>(pooled_hits_n) / n_images;
    if (r.n_images_with_target > 0) {
      const auto nt = static_cast<double>(r.n_images_with_target);
      r.miou = pooled_iou / nt;
      r.map50 = static_cast<double>(pooled_hits) / nt;
    }
  }
  return r;
}

}  // namespace vrec
