#include "hlnet/checkpoint.hpp"

#include <optional>
#include <vector>

#include "hlnet/errors.hpp"
#include "hlnet/format.hpp"
#include "hlnet/io.hpp"

namespace hlnet {

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::size_t line() const { return line_; }

  std::optional<std::string_view> next() {
    if (text_.empty()) return std::nullopt;
    const auto nl = text_.find('\n');
    if (nl == std::string_view::npos) throw ParseError("truncated checkpoint (missing final newline)", line_ + 1);
    ++line_;
    const std::string_view out = text_.substr(0, nl);
    text_.remove_prefix(nl + 1);
    return out;
  }

  std::string_view expect() {
    auto l = next();
    if (!l) throw ParseError("unexpected end of checkpoint", line_ + 1);
    return *l;
  }

 private:
  std::string_view text_;
  std::size_t line_ = 0;
};

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  while (!s.empty()) {
    const auto start = s.find_first_not_of(' ');
    if (start == std::string_view::npos) break;
    s.remove_prefix(start);
    const auto end = s.find(' ');
    out.push_back(s.substr(0, end));
    if (end == std::string_view::npos) break;
    s.remove_prefix(end);
  }
  return out;
}

template <class F>
auto at_line(std::size_t line, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), line);
  }
}

}  // namespace

std::string serialize_checkpoint(const TrainConfig& cfg, const Model& model) {
  if (!(cfg.model == model.config())) throw ContractError("checkpoint config does not describe the model");
  std::string out = std::string(kCheckpointTag) + "\n";
  const auto kv = cfg.to_key_values();
  out += "config " + std::to_string(kv.size()) + "\n";
  out += format_key_values(kv);

  const FrequencyBias& bias = model.frequency_bias();
  std::vector<std::pair<int, int>> seen;
  for (int s = 0; s < bias.num_object_classes(); ++s) {
    for (int o = 0; o < bias.num_object_classes(); ++o) {
      if (bias.seen(s, o)) seen.emplace_back(s, o);
    }
  }
  out += "bias " + std::to_string(bias.num_object_classes()) + " " + std::to_string(bias.num_predicates()) + " " +
         std::to_string(seen.size()) + "\n";
  for (const auto& [s, o] : seen) {
    out += std::to_string(s) + " " + std::to_string(o);
    for (double v : bias.row(s, o)) out += " " + format_double(v);
    out += "\n";
  }

  const auto& params = model.params().params();
  out += "params " + std::to_string(params.size()) + "\n";
  for (const auto& p : params) {
    out += "param " + p.id + " " + std::to_string(p.array.ndim());
    for (auto dim : p.array.shape()) out += " " + std::to_string(dim);
    out += "\n";
    std::string values;
    for (double v : p.array.values()) {
      if (!values.empty()) values += ' ';
      values += format_double(v);
    }
    out += values + "\n";
  }
  out += "end\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
  LineReader reader(text);
  if (reader.expect() != kCheckpointTag) throw ParseError("not a checkpoint (expected '" + std::string(kCheckpointTag) + "')", 1);

  auto header = [&](std::string_view keyword, std::size_t count) {
    const auto tokens = split_spaces(reader.expect());
    if (tokens.size() != count + 1 || tokens[0] != keyword) {
      throw ParseError("expected '" + std::string(keyword) + "' header", reader.line());
    }
    std::vector<int> values;
    for (std::size_t k = 1; k < tokens.size(); ++k) values.push_back(at_line(reader.line(), [&] { return parse_int(tokens[k]); }));
    return values;
  };

  const int config_lines = header("config", 1)[0];
  std::string config_text;
  for (int k = 0; k < config_lines; ++k) {
    config_text += std::string(reader.expect()) + "\n";
  }
  const std::size_t config_end = reader.line();
  TrainConfig cfg;
  at_line(config_end, [&] {
    const auto unknown = cfg.apply_key_values(parse_key_values(config_text));
    if (!unknown.empty()) throw ConfigError("unknown config key '" + unknown.front() + "'");
    cfg.validate();
    return 0;
  });

  const auto dims = header("bias", 3);
  if (dims[0] != cfg.model.num_object_classes || dims[1] != cfg.model.num_predicates) {
    throw ConfigError("checkpoint frequency bias is " + std::to_string(dims[0]) + "x" + std::to_string(dims[1]) +
                      " but the config expects " + std::to_string(cfg.model.num_object_classes) + "x" +
                      std::to_string(cfg.model.num_predicates));
  }
  FrequencyBias bias(dims[0], dims[1]);
  for (int k = 0; k < dims[2]; ++k) {
    const auto tokens = split_spaces(reader.expect());
    if (tokens.size() != static_cast<std::size_t>(dims[1]) + 2) throw ParseError("bad bias row", reader.line());
    at_line(reader.line(), [&] {
      const int s = parse_int(tokens[0]);
      const int o = parse_int(tokens[1]);
      if (s < 0 || o < 0 || s >= dims[0] || o >= dims[0]) throw ConfigError("bias row class out of range");
      auto row = bias.mutable_row(s, o);
      for (std::size_t r = 0; r < row.size(); ++r) row[r] = parse_double(tokens[r + 2]);
      bias.mark_seen(s, o);
      return 0;
    });
  }

  Model model(cfg.model, std::move(bias), 0);
  auto& params = model.params().params();
  const int count = header("params", 1)[0];
  if (count < 0 || static_cast<std::size_t>(count) != params.size()) {
    throw ConfigError("checkpoint stores " + std::to_string(count) + " parameters but the config builds " +
                      std::to_string(params.size()));
  }
  for (auto& p : params) {
    const auto tokens = split_spaces(reader.expect());
    if (tokens.size() < 3 || tokens[0] != "param") throw ParseError("expected 'param' header", reader.line());
    if (tokens[1] != p.id) {
      throw ConfigError("checkpoint parameter '" + std::string(tokens[1]) + "' where the config expects '" + p.id + "'");
    }
    const int ndim = at_line(reader.line(), [&] { return parse_int(tokens[2]); });
    Shape shape;
    if (ndim < 0 || tokens.size() != static_cast<std::size_t>(ndim) + 3) throw ParseError("bad shape", reader.line());
    for (int k = 0; k < ndim; ++k) {
      shape.push_back(at_line(reader.line(), [&] { return static_cast<std::size_t>(parse_uint64(tokens[3 + k])); }));
    }
    if (shape != p.array.shape()) throw ConfigError("shape mismatch for parameter '" + p.id + "'");
    const auto values = split_spaces(reader.expect());
    auto dst = p.array.mutable_values();
    if (values.size() != dst.size()) throw ParseError("parameter '" + p.id + "' has the wrong value count", reader.line());
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = at_line(reader.line(), [&] { return parse_double(values[k]); });
  }
  if (reader.expect() != "end") throw ParseError("expected 'end'", reader.line());
  if (reader.next()) throw ParseError("trailing data after 'end'", reader.line());
  return Checkpoint{cfg, std::move(model)};
}

void save_checkpoint(const std::filesystem::path& path, const TrainConfig& cfg, const Model& model) {
  write_file_atomic(path, serialize_checkpoint(cfg, model));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

}  // namespace hlnet
