// SPDX-License-Identifier: Apache-2.0
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "latefuse/io.hpp"
#include "latefuse/model.hpp"

namespace latefuse {

namespace {

constexpr std::string_view kMagic = "latefuse-model v1";

void append_vector(std::string& out, const DenseVector& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(v[i]);
  }
  out += '\n';
}

// Line-oriented reader with a one-based line counter for diagnostics.
class LineReader {
public:
  LineReader(std::string_view text, const std::string& origin) : text_(text), origin_(origin) {}

  std::string_view next() {
    if (pos_ >= text_.size()) {
      throw DataFormatError(origin_ + ": unexpected end of file after line " +
                            std::to_string(line_));
    }
    std::size_t nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    std::string_view line = text_.substr(pos_, nl - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = nl + 1;
    ++line_;
    return line;
  }

  std::string where() const { return origin_ + ": line " + std::to_string(line_); }

private:
  std::string_view text_;
  std::string origin_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view expect_keyword(LineReader& r, std::string_view keyword) {
  const auto line = r.next();
  if (line.substr(0, keyword.size()) != keyword ||
      (line.size() > keyword.size() && line[keyword.size()] != ' ')) {
    throw DataFormatError(r.where() + ": expected '" + std::string(keyword) + "'");
  }
  return line.size() > keyword.size() ? line.substr(keyword.size() + 1) : std::string_view{};
}

DenseVector parse_vector(LineReader& r, std::size_t expected, const std::string& what) {
  const auto toks = tokens(r.next());
  if (toks.size() != expected) {
    throw DataFormatError(r.where() + ": " + what + ": expected " + std::to_string(expected) +
                          " values, got " + std::to_string(toks.size()));
  }
  DenseVector v(expected);
  for (std::size_t i = 0; i < expected; ++i) v[i] = parse_double(toks[i], r.where() + " " + what);
  return v;
}

std::vector<std::string> parse_name_list(LineReader& r, std::string_view keyword) {
  const auto count_str = expect_keyword(r, keyword);
  const std::int64_t count = parse_int64(count_str, r.where() + " " + std::string(keyword));
  if (count < 0) throw DataFormatError(r.where() + ": negative name count");
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) names.emplace_back(r.next());
  return names;
}

}  // namespace

std::string format_model(const Regressor& model, const WindowMeta& meta) {
  std::string out;
  out += kMagic;
  out += '\n';
  out += "input_dim " + std::to_string(model.spec.input_dim) + '\n';
  out += "output_dim " + std::to_string(model.spec.output_dim) + '\n';
  out += "hidden";
  for (std::size_t w : model.spec.hidden_layers) out += ' ' + std::to_string(w);
  out += '\n';
  out += "activation " + to_string(model.spec.activation) + '\n';
  out += "seed " + std::to_string(model.spec.seed) + '\n';
  out += "horizon " + std::to_string(meta.horizon) + '\n';
  out += "lead_time " + std::to_string(meta.lead_time) + '\n';
  out += "input_channels " + std::to_string(meta.input_channels.size()) + '\n';
  for (const auto& name : meta.input_channels) out += name + '\n';
  out += "output_channels " + std::to_string(meta.output_channels.size()) + '\n';
  for (const auto& name : meta.output_channels) out += name + '\n';
  out += "input_stats\n";
  append_vector(out, model.input_stats.means);
  append_vector(out, model.input_stats.stds);
  out += "output_stats\n";
  append_vector(out, model.output_stats.means);
  append_vector(out, model.output_stats.stds);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    out += "layer " + std::to_string(l) + ' ' + std::to_string(layer.weights.rows()) + ' ' +
           std::to_string(layer.weights.cols()) + '\n';
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      const auto row = layer.weights.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c > 0) out += ' ';
        out += format_double(row[c]);
      }
      out += '\n';
    }
    append_vector(out, layer.biases);
  }
  out += "end\n";
  return out;
}

SavedModel parse_model(std::string_view text, const std::string& origin) {
  LineReader r(text, origin);
  if (r.next() != kMagic) {
    throw DataFormatError(origin + ": not a latefuse model file (bad magic line)");
  }

  SavedModel loaded;
  RegressorSpec& spec = loaded.model.spec;
  spec.input_dim = static_cast<std::size_t>(
      parse_int64(expect_keyword(r, "input_dim"), r.where() + " input_dim"));
  spec.output_dim = static_cast<std::size_t>(
      parse_int64(expect_keyword(r, "output_dim"), r.where() + " output_dim"));
  for (const auto tok : tokens(expect_keyword(r, "hidden"))) {
    spec.hidden_layers.push_back(
        static_cast<std::size_t>(parse_int64(tok, r.where() + " hidden")));
  }
  spec.activation = activation_from_string(expect_keyword(r, "activation"));
  {
    const auto seed_str = expect_keyword(r, "seed");
    std::uint64_t seed = 0;
    for (char ch : seed_str) {
      if (ch < '0' || ch > '9') throw DataFormatError(r.where() + ": bad seed");
      seed = seed * 10 + static_cast<std::uint64_t>(ch - '0');
    }
    spec.seed = seed;
  }
  loaded.meta.horizon = parse_int64(expect_keyword(r, "horizon"), r.where() + " horizon");
  loaded.meta.lead_time = parse_int64(expect_keyword(r, "lead_time"), r.where() + " lead_time");
  loaded.meta.input_channels = parse_name_list(r, "input_channels");
  loaded.meta.output_channels = parse_name_list(r, "output_channels");

  expect_keyword(r, "input_stats");
  loaded.model.input_stats.means = parse_vector(r, spec.input_dim, "input means");
  loaded.model.input_stats.stds = parse_vector(r, spec.input_dim, "input stds");
  expect_keyword(r, "output_stats");
  loaded.model.output_stats.means = parse_vector(r, spec.output_dim, "output means");
  loaded.model.output_stats.stds = parse_vector(r, spec.output_dim, "output stds");

  std::vector<std::size_t> widths;
  widths.push_back(spec.input_dim);
  widths.insert(widths.end(), spec.hidden_layers.begin(), spec.hidden_layers.end());
  widths.push_back(spec.output_dim);

  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto head = tokens(r.next());
    if (head.size() != 4 || head[0] != "layer") {
      throw DataFormatError(r.where() + ": expected 'layer <index> <rows> <cols>'");
    }
    const auto index = parse_int64(head[1], r.where() + " layer index");
    const auto rows = parse_int64(head[2], r.where() + " layer rows");
    const auto cols = parse_int64(head[3], r.where() + " layer cols");
    if (index != static_cast<std::int64_t>(l) ||
        rows != static_cast<std::int64_t>(widths[l + 1]) ||
        cols != static_cast<std::int64_t>(widths[l])) {
      throw DataFormatError(r.where() + ": layer header does not match declared architecture");
    }
    Layer layer{DenseMatrix(widths[l + 1], widths[l]), DenseVector()};
    for (std::size_t row = 0; row < layer.weights.rows(); ++row) {
      const DenseVector values = parse_vector(r, widths[l], "layer weights");
      std::copy(values.begin(), values.end(), layer.weights.row(row).begin());
    }
    layer.biases = parse_vector(r, widths[l + 1], "layer biases");
    loaded.model.layers.push_back(std::move(layer));
  }
  if (r.next() != "end") throw DataFormatError(r.where() + ": expected 'end'");
  return loaded;
}

void save_model(const std::filesystem::path& path, const Regressor& model,
                const WindowMeta& meta) {
  atomic_write_file(path, format_model(model, meta));
}

SavedModel load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path), path.string());
}

}  // namespace latefuse
