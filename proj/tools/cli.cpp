#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdc/compressor.hpp"
#include "tdc/lvcot.hpp"
#include "tdc/qformer.hpp"
#include "tdc/segmenter.hpp"
#include "tdc/timeline.hpp"

namespace tdc::cli {

namespace {

using nlohmann::json;

std::vector<std::size_t> parse_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ArgumentError(std::string(flag) + ": '" + item + "' is not a count");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

DescriptorMode parse_descriptor(const std::string& s) {
  if (s == "stored") return DescriptorMode::kStored;
  if (s == "pooled") return DescriptorMode::kPooled;
  throw ArgumentError("--descriptor must be stored or pooled");
}

std::vector<std::string> read_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open script " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      return json::parse(text).get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw IoError("script " + path + " is not a JSON array of strings: " + e.what());
    }
  }
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

/// Flags shared by the subcommands that build a compressed stream.
struct PipelineFlags {
  std::string input;
  std::uint64_t seed = 0;
  std::size_t max_segments = 24;
  double tau = 0.85;
  std::string descriptor = "stored";
  std::size_t window = 8;
  std::size_t k = 16;
  std::string query_type = "avgpool";
  std::string text;
  std::string params_path;
  std::size_t threads = 1;

  void add_segmenter(CLI::App* app) {
    app->add_option("--input", input, "TDCF timeline file")->required();
    app->add_option("--max-segments", max_segments, "Maximum number of scenes S_max")->capture_default_str();
    app->add_option("--tau", tau, "Similarity threshold proposing a cut (design default)")->capture_default_str();
    app->add_option("--descriptor", descriptor, "Similarity embedding: stored or pooled (design default stored)")
        ->capture_default_str();
  }

  void add_compressor(CLI::App* app) {
    add_segmenter(app);
    app->add_option("--window", window, "Window length N (design default)")->capture_default_str();
    app->add_option("--k", k, "Query tokens per dynamic frame")->capture_default_str();
    app->add_option("--query-type", query_type, "avgpool or learned")->capture_default_str();
    app->add_option("--text", text, "Instruction text fed to the compressor");
    app->add_option("--seed", seed, "Parameter init seed")->capture_default_str();
    app->add_option("--params", params_path, "Load compressor parameters from a TDCP checkpoint");
    app->add_option("--threads", threads, "Worker threads for window compression")->capture_default_str();
  }

  SegmenterConfig segmenter() const {
    SegmenterConfig c;
    c.max_scenes = max_segments;
    c.tau = tau;
    c.descriptor = parse_descriptor(descriptor);
    return c;
  }

  /// Config and params for a timeline, from the checkpoint when one is given.
  std::pair<TdcConfig, QFormerParams> compressor(const VideoTimeline& tl) const {
    TdcConfig cfg;
    cfg.segmenter = segmenter();
    cfg.window_length = window;
    cfg.threads = threads;
    if (!params_path.empty()) {
      auto ck = read_tdcp(params_path);
      cfg.qformer = ck.config;
      return {cfg, std::move(ck.params)};
    }
    cfg.qformer.queries = k;
    cfg.qformer.query_type = parse_query_type(query_type);
    cfg.qformer.visual_dim = tl.dims().visual_dim;
    cfg.qformer.audio_dim = std::max<std::size_t>(1, tl.dims().audio_dim);
    cfg.qformer.seed = seed;
    return {cfg, init_params(cfg.qformer)};
  }
};

json budget_json(const BudgetReport& b) {
  return {{"per_window", b.per_window}, {"total", b.total}, {"naive", b.naive}, {"ratio", b.ratio}};
}

json gen_cmd(const std::string& output, const SynthSpec& spec) {
  const auto tl = synth_generate(spec);
  write_tdcf(tl, output);
  const auto d = tl.dims();
  return {{"command", "gen"},
          {"output", output},
          {"seed", spec.seed},
          {"frames", tl.frame_count()},
          {"boundaries", spec.boundaries},
          {"noise", spec.noise},
          {"dims",
           {{"visual_tokens", d.visual_tokens},
            {"audio_tokens", d.audio_tokens},
            {"visual_dim", d.visual_dim},
            {"audio_dim", d.audio_dim},
            {"descriptor_dim", d.descriptor_dim}}}};
}

json segment_cmd(const PipelineFlags& f) {
  const auto tl = read_tdcf(f.input);
  const auto p = segment_scenes(tl, f.segmenter());
  json scenes = json::array();
  for (const auto& s : p.scenes()) scenes.push_back({s.begin, s.end});
  return {{"command", "segment"},       {"frames", tl.frame_count()},
          {"boundaries", p.cuts},       {"cut_similarities", p.cut_similarities},
          {"scene_count", p.scene_count()}, {"scenes", scenes}};
}

json compress_cmd(const PipelineFlags& f, const std::string& output, const std::string& save_params) {
  const auto tl = read_tdcf(f.input);
  const auto [cfg, params] = f.compressor(tl);
  const auto plan = make_windows(segment_scenes(tl, cfg.segmenter), cfg.window_length);
  const auto stream = assemble_tdc(tl, plan, params, cfg, tokenize_text(f.text, cfg.qformer.vocab));
  write_tdcs(stream, output);
  if (!save_params.empty()) write_tdcp(params, cfg.qformer, save_params);

  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& t : stream.tags) ++counts[static_cast<int>(t.provenance)];
  return {{"command", "compress"},
          {"output", output},
          {"tokens", stream.size()},
          {"dim", stream.tokens.cols()},
          {"windows", plan.windows.size()},
          {"scenes", plan.scene_count},
          {"provenance",
           {{"static_visual", counts[0]}, {"static_audio", counts[1]}, {"sep", counts[2]}, {"dynamic", counts[3]}}}};
}

json budget_cmd(const PipelineFlags& f) {
  const auto tl = read_tdcf(f.input);
  const auto partition = segment_scenes(tl, f.segmenter());
  const auto plan = make_windows(partition, f.window);
  const auto d = tl.dims();
  json j = budget_json(token_budget(d, plan, f.k));
  j["command"] = "budget";
  j["frames"] = tl.frame_count();
  j["scenes"] = plan.scene_count;
  j["windows"] = plan.windows.size();
  j["visual_tokens"] = d.visual_tokens;
  j["audio_tokens"] = d.audio_tokens;
  j["queries"] = f.k;
  j["window_length"] = f.window;
  return j;
}

json lvcot_cmd(const PipelineFlags& f, const std::string& question, std::size_t segments,
               const std::string& answerer_name, const std::string& script) {
  const auto tl = read_tdcf(f.input);
  const auto [cfg, params] = f.compressor(tl);
  LvcotConfig lc;
  lc.segments = segments;

  std::unique_ptr<Answerer> answerer;
  if (answerer_name == "mock") {
    if (script.empty()) throw ArgumentError("--answerer mock needs --script");
    answerer = mock_script(read_script(script));
  } else if (answerer_name == "echo") {
    answerer = std::make_unique<EchoAnswerer>();
  } else {
    throw ArgumentError("--answerer must be mock or echo");
  }
  const auto trace = run_lvcot(tl, question, *answerer, lc, params, cfg);

  json segs = json::array();
  for (const auto& s : trace.segments) {
    segs.push_back({{"span", {s.span.begin, s.span.end}},
                    {"prompt", s.prompt},
                    {"answer", s.answer},
                    {"stream_tokens", s.stream_tokens}});
  }
  return {{"command", "lvcot"},
          {"question", question},
          {"segments", segs},
          {"final_prompt", trace.final_prompt},
          {"final_answer", trace.final_answer},
          {"final_stream_tokens", trace.final_stream_tokens},
          {"answerer_calls", trace.answerer_calls}};
}

json gradcheck_cmd(std::uint64_t seed, const std::string& query_type, bool& passed) {
  QFormerConfig cfg = small_gradcheck_config();
  cfg.query_type = parse_query_type(query_type);
  const auto report = grad_check(cfg, seed);
  passed = report.passed;
  json tensors = json::array();
  for (const auto& t : report.tensors) {
    tensors.push_back({{"name", t.name}, {"max_rel_error", t.max_rel_error}, {"max_abs_error", t.max_abs_error}});
  }
  return {{"command", "gradcheck"},
          {"seed", seed},
          {"query_type", query_type},
          {"parameters", init_params(cfg).parameter_count()},
          {"max_rel_error", report.max_rel_error},
          {"worst_tensor", report.worst_tensor},
          {"tolerance", report.tolerance},
          {"passed", report.passed},
          {"tensors", tensors}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal dynamic context toolkit: synthetic timelines, scene segmentation, "
               "token compression, budgets and segment-then-integrate answering"};
  app.name("tdc");
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic TDCF timeline");
  SynthSpec spec;
  std::string gen_output, gen_boundaries, gen_dims = "144,50,32,32,32";
  gen->add_option("--output", gen_output, "Output TDCF file")->required();
  gen->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
  gen->add_option("--frames", spec.frames, "Seconds of video (1 fps)")->capture_default_str();
  gen->add_option("--boundaries", gen_boundaries, "Planted scene cuts, comma separated");
  gen->add_option("--noise", spec.noise, "Noise scale (design default)")->capture_default_str();
  gen->add_option("--dims", gen_dims, "visual_tokens,audio_tokens,visual_dim,audio_dim,descriptor_dim")
      ->capture_default_str();

  // segment
  auto* seg = app.add_subcommand("segment", "Scene boundaries of a timeline");
  PipelineFlags seg_flags;
  seg_flags.add_segmenter(seg);

  // compress
  auto* comp = app.add_subcommand("compress", "Write the compressed token stream (TDCS)");
  PipelineFlags comp_flags;
  std::string comp_output, comp_save;
  comp_flags.add_compressor(comp);
  comp->add_option("--output", comp_output, "Output TDCS file")->required();
  comp->add_option("--save-params", comp_save, "Also write the compressor parameters as TDCP");

  // budget
  auto* bud = app.add_subcommand("budget", "Token budget of the compressed representation");
  PipelineFlags bud_flags;
  bud_flags.add_segmenter(bud);
  bud->add_option("--window", bud_flags.window, "Window length N (design default)")->capture_default_str();
  bud->add_option("--k", bud_flags.k, "Query tokens per dynamic frame")->capture_default_str();

  // lvcot
  auto* lv = app.add_subcommand("lvcot", "Segment-then-integrate question answering");
  PipelineFlags lv_flags;
  std::string question, answerer_name = "mock", script;
  std::size_t segments = 3;
  lv_flags.add_compressor(lv);
  lv->add_option("--question", question, "Question about the video")->required();
  lv->add_option("--segments", segments, "Number of time-equal segments M")->capture_default_str();
  lv->add_option("--answerer", answerer_name, "mock or echo")->capture_default_str();
  lv->add_option("--script", script, "Mock answers: JSON array of strings or one answer per line");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the analytic backward pass");
  std::uint64_t gc_seed = 1;
  std::string gc_query = "avgpool";
  gc->add_option("--seed", gc_seed, "Seed for params and inputs")->capture_default_str();
  gc->add_option("--query-type", gc_query, "avgpool or learned")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "tdc: " << e.what() << "\n";
    return kUsage;
  }

  try {
    json record;
    int code = kOk;
    if (*gen) {
      spec.boundaries = parse_list(gen_boundaries, "--boundaries");
      const auto d = parse_list(gen_dims, "--dims");
      if (d.size() != 5) throw ArgumentError("--dims needs five comma-separated counts");
      spec.dims = {d[0], d[1], d[2], d[3], d[4]};
      record = gen_cmd(gen_output, spec);
    } else if (*seg) {
      record = segment_cmd(seg_flags);
    } else if (*comp) {
      record = compress_cmd(comp_flags, comp_output, comp_save);
    } else if (*bud) {
      record = budget_cmd(bud_flags);
    } else if (*lv) {
      record = lvcot_cmd(lv_flags, question, segments, answerer_name, script);
    } else if (*gc) {
      bool passed = false;
      record = gradcheck_cmd(gc_seed, gc_query, passed);
      if (!passed) code = kNumeric;
    }
    out << record.dump() << "\n";
    if (code != kOk) err << "tdc: gradient check failed\n";
    return code;
  } catch (const ArgumentError& e) {
    err << "tdc: " << e.what() << "\n";
    return kUsage;
  } catch (const ShapeError& e) {
    err << "tdc: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "tdc: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    err << "tdc: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    err << "tdc: " << e.what() << "\n";
    return kNumeric;
  } catch (const DegenerateInputError& e) {
    err << "tdc: " << e.what() << "\n";
    return kNumeric;
  } catch (const OrchestrationError& e) {
    err << "tdc: " << e.what() << "\n";
    return kOrchestration;
  }
}

}  // namespace tdc::cli
