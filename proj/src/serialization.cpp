#include "relunet/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "relunet/error.hpp"

namespace relunet {

using nlohmann::json;

std::string format_double(double v) {
  if (v == 0.0) return std::signbit(v) ? "-0.0" : "0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  const auto fail = [&] {
    return Error(ErrorCode::kParse, "not a number: '" + std::string(text) + "'");
  };
  if (text.starts_with("2^")) {
    const std::string_view e = text.substr(2);
    int k = 0;
    const auto res = std::from_chars(e.data(), e.data() + e.size(), k);
    if (res.ec != std::errc() || res.ptr != e.data() + e.size() || k < -1074 || k > 1023) {
      throw fail();
    }
    return std::ldexp(1.0, k);
  }
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      !std::isfinite(v)) {
    throw fail();
  }
  return v;
}

json record_to_json(const ConstructionRecord& rec) {
  json j = {{"kind", std::string(to_string(rec.kind))},
            {"m", rec.m},
            {"n", rec.n},
            {"D", rec.D},
            {"eps", rec.eps},
            {"sawtooth_order", rec.sawtooth_order},
            {"norm", std::string(to_string(rec.norm))},
            {"seed", rec.seed},
            {"input_packing", rec.input_packing}};
  if (rec.kind == ConstructionKind::kAffineV2 || rec.kind == ConstructionKind::kAffineV3) {
    j["depth"] = rec.depth;
  }
  return j;
}

ConstructionRecord record_from_json(const json& meta) {
  try {
    ConstructionRecord rec;
    const auto kind = parse_kind(meta.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::kParse, "unknown construction kind in meta");
    rec.kind = *kind;
    rec.m = meta.at("m").get<std::size_t>();
    rec.n = meta.at("n").get<std::size_t>();
    rec.D = meta.at("D").get<double>();
    rec.eps = meta.at("eps").get<double>();
    rec.sawtooth_order = meta.value("sawtooth_order", 0);
    const auto norm = parse_norm(meta.value("norm", std::string("sup")));
    if (!norm) throw Error(ErrorCode::kParse, "unknown norm in meta");
    rec.norm = *norm;
    rec.depth = meta.value("depth", std::size_t{3});
    rec.seed = meta.value("seed", std::uint64_t{0});
    rec.input_packing = meta.value("input_packing", std::string());
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("network meta: ") + e.what());
  }
}

json network_meta(const BuiltNetwork& built, const BudgetConstants& constants) {
  const ConstructionRecord& rec = built.record;
  json meta = record_to_json(rec);
  const NetworkMetrics mt = metrics(built.fnn);
  meta["metrics"] = {{"L", mt.depth},
                     {"M", mt.connectivity},
                     {"N", mt.neurons},
                     {"W", mt.max_width},
                     {"B", mt.max_weight}};
  BudgetConstants c = constants;
  c.affine_depth = rec.depth;
  const BoundBudget b = predicted_budget(rec.kind, rec.m, rec.n, rec.D, rec.eps, c, rec.norm);
  json budget = {{"target_eps", b.target_eps},
                 {"depth_bound", b.depth_bound},
                 {"width_bound", b.width_bound},
                 {"weight_bound", b.weight_bound},
                 {"depth_constant", b.depth_constant}};
  if (b.connectivity_bound) budget["connectivity_bound"] = *b.connectivity_bound;
  if (b.neuron_bound) budget["neuron_bound"] = *b.neuron_bound;
  meta["budget"] = budget;
  if (built.matrix) {
    json rows = json::array();
    for (std::size_t r = 0; r < built.matrix->rows(); ++r) {
      const auto row = built.matrix->row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    meta["matrix"] = rows;
  }
  return meta;
}

void write_network(std::ostream& out, const Fnn& fnn, const json& meta) {
  std::string buf;
  const auto put = [&](double v) {
    char tmp[32];
    if (v == 0.0) {
      buf += std::signbit(v) ? "-0.0" : "0";
      return;
    }
    const auto res = std::to_chars(tmp, tmp + sizeof tmp, v);
    buf.append(tmp, res.ptr);
  };
  out << "{\"meta\":" << meta.dump() << ",\n\"layers\":[";
  for (std::size_t k = 1; k <= fnn.depth(); ++k) {
    const Layer& l = fnn.layer(k);
    buf.clear();
    buf += k > 1 ? ",\n{\"weights\":[" : "\n{\"weights\":[";
    for (std::size_t r = 0; r < l.out_dim(); ++r) {
      buf += r ? ",[" : "[";
      const auto row = l.weights.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) buf += ',';
        put(row[c]);
      }
      buf += ']';
    }
    buf += "],\"bias\":[";
    for (std::size_t r = 0; r < l.bias.size(); ++r) {
      if (r) buf += ',';
      put(l.bias[r]);
    }
    buf += "]}";
    out << buf;
  }
  out << "\n]}\n";
}

namespace {

// SAX consumer: "meta" becomes a small JSON tree, "layers" streams straight
// into row vectors.
class NetworkSax : public nlohmann::json_sax<json> {
 public:
  json meta;
  std::vector<Layer> layers;

  bool null() override { return meta_value(nullptr); }
  bool boolean(bool v) override { return meta_value(v); }
  bool number_integer(number_integer_t v) override {
    return in_meta() ? meta_value(v) : number(static_cast<double>(v));
  }
  bool number_unsigned(number_unsigned_t v) override {
    return in_meta() ? meta_value(v) : number(static_cast<double>(v));
  }
  bool number_float(number_float_t v, const string_t&) override {
    return in_meta() ? meta_value(v) : number(v);
  }
  bool string(string_t& v) override { return meta_value(v); }
  bool binary(binary_t&) override { return fail("unexpected binary value"); }

  bool start_object(std::size_t) override {
    if (in_meta()) return meta_open(json::object());
    frames_.push_back({true, {}});
    if (path_is_layer()) {
      rows_.clear();
      bias_.clear();
      have_weights_ = have_bias_ = false;
    } else if (frames_.size() != 1) {
      return fail("unexpected object");
    }
    return true;
  }
  bool end_object() override {
    if (in_meta() && !meta_stack_.empty()) return meta_close();
    if (path_is_layer()) {
      if (!have_weights_ || !have_bias_) return fail("layer without weights or bias");
      const std::size_t cols = rows_.empty() ? 0 : rows_.front().size();
      Matrix w;
      try {
        w = Matrix::from_rows(rows_, cols);
      } catch (const Error&) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "layer " + std::to_string(layers.size() + 1) + " has ragged weight rows",
                    layers.size() + 1);
      }
      layers.push_back({std::move(w), std::move(bias_)});
      bias_ = {};
    }
    frames_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    if (in_meta()) return meta_open(json::array());
    frames_.push_back({false, {}});
    const std::size_t d = frames_.size();
    if (d == 2 && root_key() == "layers") return true;
    if (d == 4 && path_is_field("weights")) {
      have_weights_ = true;
      return true;
    }
    if (d == 4 && path_is_field("bias")) {
      have_bias_ = true;
      return true;
    }
    if (d == 5 && path_is_field("weights")) {
      rows_.emplace_back();
      return true;
    }
    return fail("unexpected array");
  }
  bool end_array() override {
    if (in_meta() && !meta_stack_.empty()) return meta_close();
    frames_.pop_back();
    return true;
  }
  bool key(string_t& k) override {
    if (in_meta() && !meta_stack_.empty()) {
      meta_key_ = k;
      return true;
    }
    frames_.back().key = k;
    return true;
  }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& e) override {
    throw Error(ErrorCode::kParse,
                "network file, byte " + std::to_string(pos) + ": " + e.what());
  }

 private:
  struct Frame {
    bool object;
    std::string key;
  };

  bool fail(const std::string& what) { throw Error(ErrorCode::kParse, "network file: " + what); }

  const std::string& root_key() const { return frames_.front().key; }
  bool in_meta() const { return frames_.size() == 1 && root_key() == "meta"; }
  bool path_is_layer() const {
    return frames_.size() == 3 && root_key() == "layers" && frames_[2].object;
  }
  bool path_is_field(const char* name) const {
    return frames_.size() >= 4 && root_key() == "layers" && frames_[2].key == name;
  }

  bool number(double v) {
    const std::size_t d = frames_.size();
    if (d == 5 && path_is_field("weights")) {
      rows_.back().push_back(v);
      return true;
    }
    if (d == 4 && path_is_field("bias")) {
      bias_.push_back(v);
      return true;
    }
    return fail("number outside a weight row or bias");
  }

  // Minimal DOM builder for the meta block.
  json* meta_insert(json v) {
    if (meta_stack_.empty()) {
      meta = std::move(v);
      return &meta;
    }
    json& parent = *meta_stack_.back();
    if (parent.is_array()) {
      parent.push_back(std::move(v));
      return &parent.back();
    }
    parent[meta_key_] = std::move(v);
    return &parent[meta_key_];
  }
  bool meta_value(json v) {
    if (!in_meta()) return fail("unexpected value");
    meta_insert(std::move(v));
    return true;
  }
  bool meta_open(json v) {
    meta_stack_.push_back(meta_insert(std::move(v)));
    return true;
  }
  bool meta_close() {
    meta_stack_.pop_back();
    return true;
  }

  std::vector<Frame> frames_;
  std::vector<json*> meta_stack_;
  std::string meta_key_;
  std::vector<Vector> rows_;
  Vector bias_;
  bool have_weights_ = false;
  bool have_bias_ = false;
};

}  // namespace

NetworkFile read_network(std::istream& in) {
  NetworkSax sax;
  json::sax_parse(in, &sax);
  if (sax.layers.empty()) throw Error(ErrorCode::kParse, "network file has no layers");
  if (sax.meta.is_null()) sax.meta = json::object();
  return {Fnn(std::move(sax.layers)), std::move(sax.meta)};
}

void save_network(const std::filesystem::path& path, const Fnn& fnn, const json& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  write_network(out, fnn, meta);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

NetworkFile load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return read_network(in);
}

}  // namespace relunet
