#include "tdc/lvcot.hpp"

#include <algorithm>
#include <cstdio>
#include <future>

namespace tdc {

std::string MockAnswerer::answer(const std::string& prompt, const TdcStream&) {
  if (calls_ >= script_.size()) {
    throw OrchestrationError("mock script exhausted at call " + std::to_string(calls_ + 1) + " (script has " +
                             std::to_string(script_.size()) + " answers)");
  }
  prompts_.push_back(prompt);
  return script_[calls_++];
}

std::string EchoAnswerer::answer(const std::string& prompt, const TdcStream& stream) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return "echo " + std::string(hex) + " prompt_chars=" + std::to_string(prompt.size()) +
         " tokens=" + std::to_string(stream.size());
}

std::size_t EchoAnswerer::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::unique_ptr<MockAnswerer> mock_script(std::vector<std::string> answers) {
  return std::make_unique<MockAnswerer>(std::move(answers));
}

std::vector<Span> split_spans(std::size_t seconds, std::size_t segments) {
  if (segments == 0 || segments > seconds) {
    throw ArgumentError("split_spans: need 1 <= M <= T, got M=" + std::to_string(segments) +
                        " T=" + std::to_string(seconds));
  }
  std::vector<Span> spans;
  std::size_t start = 0;
  for (auto len : group_sizes(seconds, segments)) {
    spans.push_back({start, start + len});
    start += len;
  }
  return spans;
}

std::string interval_tag(Span span) {
  return "[" + std::to_string(span.begin) + "s-" + std::to_string(span.end) + "s]:";
}

bool LvcotTrace::operator==(const LvcotTrace& o) const {
  if (segments.size() != o.segments.size()) return false;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& a = segments[i];
    const auto& b = o.segments[i];
    if (!(a.span == b.span) || a.prompt != b.prompt || a.answer != b.answer ||
        a.stream_tokens != b.stream_tokens || a.frames != b.frames) {
      return false;
    }
  }
  return final_prompt == o.final_prompt && final_answer == o.final_answer &&
         final_stream_tokens == o.final_stream_tokens && answerer_calls == o.answerer_calls;
}

namespace {

/// Single left-to-right pass, so substituted values are never rescanned.
std::string substitute(const std::string& text, const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool matched = false;
    if (text[pos] == '{') {
      for (const auto& [key, value] : vars) {
        if (text.compare(pos + 1, key.size(), key) == 0 && pos + 1 + key.size() < text.size() &&
            text[pos + 1 + key.size()] == '}') {
          out += value;
          pos += key.size() + 2;
          matched = true;
          break;
        }
      }
    }
    if (!matched) out += text[pos++];
  }
  return out;
}

std::vector<std::uint32_t> distinct_frames(const TdcStream& s) {
  std::vector<std::uint32_t> frames;
  for (const auto& tag : s.tags) frames.push_back(tag.frame);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  return frames;
}

}  // namespace

LvcotTrace run_lvcot(const VideoTimeline& tl, const std::string& question, Answerer& answerer,
                     const LvcotConfig& cfg, const QFormerParams& params, const TdcConfig& tdc) {
  const auto spans = split_spans(tl.frame_count(), cfg.segments);
  const auto text = tokenize_text(question, tdc.qformer.vocab);

  LvcotTrace trace;
  std::vector<TdcStream> streams;
  for (const auto& span : spans) {
    SegmentRecord rec;
    rec.span = span;
    rec.prompt = substitute(cfg.segment_template, {{"question", question},
                                                   {"start", std::to_string(span.begin)},
                                                   {"end", std::to_string(span.end)}});
    streams.push_back(encode_range(tl, span, params, tdc, text));
    rec.stream_tokens = streams.back().size();
    rec.frames = distinct_frames(streams.back());
    trace.segments.push_back(std::move(rec));
  }

  auto ask = [&](std::size_t i) {
    try {
      return answerer.answer(trace.segments[i].prompt, streams[i]);
    } catch (const std::exception& e) {
      throw OrchestrationError("segment " + std::to_string(i + 1) + " " + interval_tag(spans[i]) + " failed: " +
                               e.what());
    }
  };
  if (answerer.concurrent_safe() && spans.size() > 1) {
    std::vector<std::future<std::string>> pending;
    for (std::size_t i = 0; i < spans.size(); ++i) pending.push_back(std::async(std::launch::async, ask, i));
    for (std::size_t i = 0; i < spans.size(); ++i) trace.segments[i].answer = pending[i].get();
  } else {
    for (std::size_t i = 0; i < spans.size(); ++i) trace.segments[i].answer = ask(i);
  }
  trace.answerer_calls = spans.size();

  std::string reasoning;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i) reasoning += '\n';
    reasoning += interval_tag(spans[i]) + " " + trace.segments[i].answer;
  }
  trace.final_prompt = substitute(cfg.final_template, {{"reasoning", reasoning}, {"question", question}});

  const TdcStream whole = encode_range(tl, Span{0, tl.frame_count()}, params, tdc, text);
  trace.final_stream_tokens = whole.size();
  try {
    trace.final_answer = answerer.answer(trace.final_prompt, whole);
  } catch (const std::exception& e) {
    throw OrchestrationError(std::string("final answer failed: ") + e.what());
  }
  ++trace.answerer_calls;
  return trace;
}

}  // namespace tdc
