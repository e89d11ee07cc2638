#include "ensq/dataset.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ensq/io_util.hpp"
#include "ensq/rng.hpp"

namespace ensq {

bool Dataset::all_labeled() const {
  for (const Sample& s : samples) {
    if (!s.mos.has_value()) return false;
  }
  return true;
}

namespace {

int parse_int(std::string_view token, const std::string& context) {
  int v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty()) {
    throw std::runtime_error(context + ": not an integer: '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
}

Dataset parse_dataset(const std::filesystem::path& path, bool keep_labels) {
  const std::string text = read_file(path);
  Dataset dataset;
  if (text.empty()) return dataset;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    ++lineno;
    pos = end + 1;
    const std::string context = path.string() + ":" + std::to_string(lineno);
    if (line.empty()) continue;

    if (!saw_header) {
      if (!line.starts_with("#dim=")) {
        throw std::runtime_error(context + ": expected '#dim=<D>' header");
      }
      dataset.feature_dim = parse_int(line.substr(5), context + " (header)");
      if (dataset.feature_dim < 1) {
        throw std::runtime_error(context + ": feature dim must be positive");
      }
      saw_header = true;
      continue;
    }

    const auto fields = split_on(line, '\t');
    if (fields.size() != 3) {
      throw std::runtime_error(context + ": expected 'id<TAB>mos<TAB>features'");
    }
    Sample sample;
    sample.id = std::string(fields[0]);
    if (sample.id.empty()) throw std::runtime_error(context + ": empty sample id");
    if (fields[1] != "-") {
      const double mos = parse_double(fields[1], context + " (mos)");
      if (!std::isfinite(mos)) throw std::runtime_error(context + ": non-finite mos");
      if (keep_labels) sample.mos = mos;
    }
    const auto feats = split_on(fields[2], ',');
    if (static_cast<int>(feats.size()) != dataset.feature_dim) {
      throw std::runtime_error(context + ": expected " + std::to_string(dataset.feature_dim) +
                               " features, got " + std::to_string(feats.size()));
    }
    sample.features.reserve(feats.size());
    for (const auto& f : feats) {
      sample.features.push_back(parse_double(f, context + " (feature)"));
    }
    dataset.samples.push_back(std::move(sample));
  }
  return dataset;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(path, /*keep_labels=*/true);
}

Dataset load_dataset_label_blind(const std::filesystem::path& path) {
  return parse_dataset(path, /*keep_labels=*/false);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::string out;
  if (!dataset.samples.empty() || dataset.feature_dim > 0) {
    out += "#dim=" + std::to_string(dataset.feature_dim) + "\n";
  }
  for (const Sample& sample : dataset.samples) {
    if (static_cast<int>(sample.features.size()) != dataset.feature_dim) {
      throw std::invalid_argument("save_dataset: sample '" + sample.id +
                                  "' has inconsistent feature length");
    }
    out += sample.id;
    out += '\t';
    out += sample.mos.has_value() ? format_double(*sample.mos) : std::string("-");
    out += '\t';
    for (std::size_t i = 0; i < sample.features.size(); ++i) {
      if (i > 0) out += ',';
      out += format_double(sample.features[i]);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

Dataset strip_labels(const Dataset& dataset) {
  Dataset out = dataset;
  for (Sample& s : out.samples) s.mos.reset();
  return out;
}

Mat feature_matrix(const Dataset& dataset) {
  Mat features(static_cast<int>(dataset.size()), dataset.feature_dim);
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const Sample& s = dataset.samples[r];
    if (static_cast<int>(s.features.size()) != dataset.feature_dim) {
      throw std::invalid_argument("feature_matrix: inconsistent feature length at '" + s.id + "'");
    }
    for (int c = 0; c < dataset.feature_dim; ++c) {
      features(static_cast<int>(r), c) = s.features[static_cast<std::size_t>(c)];
    }
  }
  return features;
}

std::vector<double> mos_values(const Dataset& dataset) {
  std::vector<double> mos;
  mos.reserve(dataset.size());
  for (const Sample& s : dataset.samples) {
    if (!s.mos.has_value()) {
      throw std::invalid_argument("mos_values: sample '" + s.id + "' has no MOS");
    }
    mos.push_back(*s.mos);
  }
  return mos;
}

SplitResult split(const Dataset& dataset, const SplitSpec& spec, int repeat_index) {
  if (repeat_index < 0 || repeat_index >= static_cast<int>(spec.repeat_seeds.size())) {
    throw std::invalid_argument("split: repeat_index out of range");
  }
  if (dataset.size() < 5) throw std::invalid_argument("split: dataset too small");

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.repeat_seeds[static_cast<std::size_t>(repeat_index)]);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_index(i + 1)]);
  }

  const std::size_t n = dataset.size();
  const auto n_train = static_cast<std::size_t>(std::floor(spec.fractions[0] * n));
  const auto n_val = static_cast<std::size_t>(std::floor(spec.fractions[1] * n));

  SplitResult result;
  result.train.feature_dim = result.val.feature_dim = result.test.feature_dim =
      dataset.feature_dim;
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = dataset.samples[order[i]];
    if (i < n_train) {
      result.train.samples.push_back(s);
    } else if (i < n_train + n_val) {
      result.val.samples.push_back(s);
    } else {
      result.test.samples.push_back(s);
    }
  }
  return result;
}

}  // namespace ensq
