#pragma once

// Training-free long-video chain of thought: answer per time-equal segment,
// then answer once more over the whole video with the interval-tagged notes.

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tdc/compressor.hpp"

namespace tdc {

/// The downstream multimodal model.
class Answerer {
 public:
  virtual ~Answerer() = default;
  virtual std::string answer(const std::string& prompt, const TdcStream& stream) = 0;
  /// True when `answer` may be called from several threads at once.
  virtual bool concurrent_safe() const { return false; }
};

/// Replays a fixed list of answers in call order.
class MockAnswerer final : public Answerer {
 public:
  explicit MockAnswerer(std::vector<std::string> script) : script_(std::move(script)) {}

  std::string answer(const std::string& prompt, const TdcStream& stream) override;
  std::size_t calls() const { return calls_; }
  const std::vector<std::string>& prompts() const { return prompts_; }

 private:
  std::vector<std::string> script_;
  std::vector<std::string> prompts_;
  std::size_t calls_ = 0;
};

/// Answers with a digest of its inputs: prompt hash, prompt length and stream shape.
class EchoAnswerer final : public Answerer {
 public:
  std::string answer(const std::string& prompt, const TdcStream& stream) override;
  bool concurrent_safe() const override { return true; }
  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

std::unique_ptr<MockAnswerer> mock_script(std::vector<std::string> answers);

inline constexpr const char* kDefaultSegmentTemplate =
    "Summarize the information in this segment relevant to: {question}";
inline constexpr const char* kDefaultFinalTemplate =
    "{reasoning}\nAnswer the question using the whole video and the notes above: {question}";

/// Templates understand {question}, {start} and {end} (segment) and {reasoning} (final).
struct LvcotConfig {
  std::size_t segments = 3;  // M
  std::string segment_template = kDefaultSegmentTemplate;
  std::string final_template = kDefaultFinalTemplate;
};

/// M contiguous spans over [0, T), sizes ceil(T/M) first, then floor(T/M).
std::vector<Span> split_spans(std::size_t seconds, std::size_t segments);

/// "[{a}s-{b}s]:"
std::string interval_tag(Span span);

struct SegmentRecord {
  Span span;
  std::string prompt;
  std::string answer;
  std::size_t stream_tokens = 0;
  std::vector<std::uint32_t> frames;  // distinct frames present in the segment stream
};

struct LvcotTrace {
  std::vector<SegmentRecord> segments;
  std::string final_prompt;
  std::string final_answer;
  std::size_t final_stream_tokens = 0;
  std::size_t answerer_calls = 0;

  bool operator==(const LvcotTrace& o) const;
};

/// Segment streams segment scenes inside their own span only; the final call
/// re-encodes the whole timeline.
LvcotTrace run_lvcot(const VideoTimeline& tl, const std::string& question, Answerer& answerer,
                     const LvcotConfig& cfg, const QFormerParams& params, const TdcConfig& tdc);

}  // namespace tdc
