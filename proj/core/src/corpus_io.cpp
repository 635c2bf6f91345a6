#include "hlnet/corpus_io.hpp"

#include <sstream>

#include "hlnet/errors.hpp"
#include "hlnet/format.hpp"
#include "hlnet/io.hpp"

namespace hlnet {

namespace {

constexpr const char* kSplitFiles[] = {"train.sg", "val.sg", "test.sg"};

class TokenReader {
 public:
  TokenReader(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  bool done() {
    skip_space();
    return pos_ >= line_.size();
  }

  std::string_view next(const char* what) {
    skip_space();
    if (pos_ >= line_.size()) throw ParseError(std::string("record ends before ") + what, line_no_);
    const std::size_t start = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') ++pos_;
    return line_.substr(start, pos_ - start);
  }

  std::string_view peek() {
    skip_space();
    const std::size_t save = pos_;
    std::size_t end = pos_;
    while (end < line_.size() && line_[end] != ' ' && line_[end] != '\t') ++end;
    pos_ = save;
    return line_.substr(pos_, end - pos_);
  }

  double number(const char* what) {
    const auto tok = next(what);
    try {
      return parse_double(tok);
    } catch (const ConfigError&) {
      throw ParseError(std::string("bad ") + what + " '" + std::string(tok) + "'", line_no_);
    }
  }

  long integer(const char* what) {
    const auto tok = next(what);
    try {
      return parse_int(tok);
    } catch (const ConfigError&) {
      throw ParseError(std::string("bad ") + what + " '" + std::string(tok) + "'", line_no_);
    }
  }

  std::size_t line_no() const { return line_no_; }

 private:
  void skip_space() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r')) ++pos_;
  }

  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

SceneGraph parse_scene(TokenReader& in) {
  const std::size_t line_no = in.line_no();
  if (in.next("record tag") != "scene") throw ParseError("record must start with 'scene'", line_no);
  SceneGraph g;
  g.canvas_w = in.number("canvas width");
  g.canvas_h = in.number("canvas height");
  if (!(g.canvas_w > 0.0 && g.canvas_h > 0.0)) throw ParseError("canvas must be positive", line_no);
  while (!in.done()) {
    const auto tag = in.next("entry tag");
    if (tag == "node") {
      if (!g.gt_triplets.empty()) throw ParseError("node entry after rel entries", line_no);
      ObjectNode n;
      const long id = in.integer("node id");
      if (id != static_cast<long>(g.nodes.size())) {
        throw ParseError("node id " + std::to_string(id) + " out of sequence", line_no);
      }
      n.id = static_cast<std::size_t>(id);
      n.box.x1 = in.number("x1");
      n.box.y1 = in.number("y1");
      n.box.x2 = in.number("x2");
      n.box.y2 = in.number("y2");
      if (!n.box.valid()) throw ParseError("degenerate box on node " + std::to_string(id), line_no);
      const long c = in.integer("class");
      if (c < 0) throw ParseError("negative class on node " + std::to_string(id), line_no);
      n.class_label = static_cast<int>(c);
      g.nodes.push_back(std::move(n));
    } else if (tag == "rel") {
      const long s = in.integer("subject id");
      const long o = in.integer("object id");
      const long p = in.integer("predicate");
      const auto n = static_cast<long>(g.nodes.size());
      if (s < 0 || o < 0 || s >= n || o >= n || s == o) {
        throw ParseError("relation endpoints " + std::to_string(s) + "->" + std::to_string(o) + " invalid", line_no);
      }
      if (p < 0) throw ParseError("negative predicate", line_no);
      g.gt_triplets.push_back({static_cast<std::size_t>(s), static_cast<std::size_t>(o), static_cast<int>(p)});
    } else {
      throw ParseError("unknown entry '" + std::string(tag) + "'", line_no);
    }
  }
  return g;
}

}  // namespace

std::string serialize_scenes(const std::vector<SceneGraph>& scenes) {
  std::string out;
  for (const auto& g : scenes) {
    out += "scene " + format_fixed(g.canvas_w, 6) + " " + format_fixed(g.canvas_h, 6);
    for (const auto& n : g.nodes) {
      out += " node " + std::to_string(n.id) + " " + format_fixed(n.box.x1, 6) + " " + format_fixed(n.box.y1, 6) + " " +
             format_fixed(n.box.x2, 6) + " " + format_fixed(n.box.y2, 6) + " " + std::to_string(n.class_label);
    }
    for (const auto& t : g.gt_triplets) {
      out += " rel " + std::to_string(t.subject) + " " + std::to_string(t.object) + " " + std::to_string(t.predicate);
    }
    out += '\n';
  }
  return out;
}

std::vector<SceneGraph> parse_scenes(std::string_view text) {
  std::vector<SceneGraph> scenes;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos) throw ParseError("truncated record (missing end of line)", line_no);
    const std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl + 1);
    if (trim(line).empty()) continue;
    TokenReader reader(line, line_no);
    scenes.push_back(parse_scene(reader));
  }
  return scenes;
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus, const GenConfig& cfg) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / kSplitFiles[0], serialize_scenes(corpus.train));
  write_file_atomic(dir / kSplitFiles[1], serialize_scenes(corpus.val));
  write_file_atomic(dir / kSplitFiles[2], serialize_scenes(corpus.test));
  write_file_atomic(dir / kCorpusConfigFile, format_key_values(cfg.to_key_values()));
}

LoadedCorpus read_corpus(const std::filesystem::path& dir) {
  LoadedCorpus out;
  out.config = GenConfig::from_key_values(parse_key_values(read_file(dir / kCorpusConfigFile)));
  std::vector<SceneGraph>* splits[] = {&out.corpus.train, &out.corpus.val, &out.corpus.test};
  const Split ids[] = {Split::Train, Split::Val, Split::Test};
  for (int s = 0; s < 3; ++s) {
    const auto path = dir / kSplitFiles[s];
    try {
      *splits[s] = parse_scenes(read_file(path));
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.detail(), e.line());
    }
    for (std::size_t i = 0; i < splits[s]->size(); ++i) synthesize_features((*splits[s])[i], out.config, ids[s], i);
  }
  return out;
}

std::uint64_t corpus_hash(const std::filesystem::path& dir) {
  std::uint64_t h = fnv1a(read_file(dir / kCorpusConfigFile));
  for (const char* f : kSplitFiles) h = fnv1a(read_file(dir / f), h);
  return h;
}

}  // namespace hlnet
