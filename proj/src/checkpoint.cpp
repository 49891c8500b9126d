#include "dgad/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dgad/error.hpp"

namespace dgad {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'D', 'G', 'A', 'D', 'C', 'K', 'P', 'T'};
enum : std::uint8_t { kEnd = 0, kArray = 1, kString = 2 };

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < n; ++i) h = (h ^ data[i]) * 0x100000001B3ULL;
  return h;
}

struct Array {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  void header(std::uint8_t kind, const std::string& name) {
    put(kind);
    put(static_cast<std::uint32_t>(name.size()));
    put_bytes(name.data(), name.size());
  }
  void array(const std::string& name, std::vector<std::uint64_t> dims, const double* values) {
    header(kArray, name);
    put(static_cast<std::uint32_t>(dims.size()));
    std::uint64_t count = 1;
    for (auto d : dims) {
      put(d);
      count *= d;
    }
    put_bytes(values, count * sizeof(double));
  }
  void vector(const std::string& name, const Eigen::VectorXd& v) {
    array(name, {static_cast<std::uint64_t>(v.size())}, v.data());
  }
  void matrix(const std::string& name, const Eigen::MatrixXd& m) {
    array(name, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())},
          m.data());
  }
  void scalars(const std::string& name, const std::vector<double>& v) {
    array(name, {static_cast<std::uint64_t>(v.size())}, v.data());
  }
  void text(const std::string& name, const std::string& value) {
    header(kString, name);
    put(static_cast<std::uint64_t>(value.size()));
    put_bytes(value.data(), value.size());
  }

  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const std::uint8_t* take(std::size_t n) {
    if (n > size_ - pos_) throw FormatError("checkpoint truncated");
    const std::uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::vector<double> pair_scores(const PrototypePair& p) {
  return {p.difference, p.similarity ? 1.0 : 0.0, p.similarity.value_or(0.0),
          p.retention ? 1.0 : 0.0, p.retention.value_or(0.0)};
}

void write_pair(Writer& w, const std::string& prefix, const PrototypePair& p) {
  w.vector(prefix + ".normal", p.normal);
  w.vector(prefix + ".abnormal", p.abnormal);
  w.scalars(prefix + ".scores", pair_scores(p));
  w.text(prefix + ".origin", p.origin);
}

class Contents {
 public:
  std::map<std::string, Array> arrays;
  std::map<std::string, std::string> strings;

  const Array& array(const std::string& name, std::size_t expected = SIZE_MAX) const {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw FormatError("checkpoint lacks array '" + name + "'");
    if (expected != SIZE_MAX && it->second.values.size() != expected) {
      throw FormatError("checkpoint array '" + name + "' has the wrong size");
    }
    return it->second;
  }
  const std::string& text(const std::string& name) const {
    auto it = strings.find(name);
    if (it == strings.end()) throw FormatError("checkpoint lacks string '" + name + "'");
    return it->second;
  }
  Eigen::VectorXd vector(const std::string& name, std::size_t expected) const {
    const Array& a = array(name, expected);
    return Eigen::Map<const Eigen::VectorXd>(a.values.data(), static_cast<Eigen::Index>(expected));
  }
  Eigen::MatrixXd matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
    const Array& a = array(name, rows * cols);
    if (a.dims.size() != 2 || a.dims[0] != rows || a.dims[1] != cols) {
      throw FormatError("checkpoint matrix '" + name + "' has the wrong shape");
    }
    return Eigen::Map<const Eigen::MatrixXd>(a.values.data(), static_cast<Eigen::Index>(rows),
                                             static_cast<Eigen::Index>(cols));
  }
};

PrototypePair read_pair(const Contents& c, const std::string& prefix, std::size_t dim) {
  PrototypePair p;
  p.normal = c.vector(prefix + ".normal", dim);
  p.abnormal = c.vector(prefix + ".abnormal", dim);
  const auto& s = c.array(prefix + ".scores", 5).values;
  p.difference = s[0];
  if (s[1] != 0.0) p.similarity = s[2];
  if (s[3] != 0.0) p.retention = s[4];
  p.origin = c.text(prefix + ".origin");
  return p;
}

std::size_t as_size(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v)) throw FormatError(std::string("bad ") + what);
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.put_bytes(kMagic, sizeof kMagic);
  w.put(kCheckpointVersion);

  const Model& m = ck.model;
  const EncoderConfig& ec = m.encoder.config();
  std::vector<double> shape{static_cast<double>(ec.input_dim), static_cast<double>(ec.attention_dim),
                            static_cast<double>(ec.prototype_dim),
                            ec.activation == Activation::kRelu ? 0.0 : 1.0};
  for (auto d : ec.layer_dims) shape.push_back(static_cast<double>(d));
  w.scalars("encoder.shape", shape);
  w.vector("encoder.values", m.encoder.values());
  w.scalars("ego.options", {static_cast<double>(m.ego.hops), static_cast<double>(m.ego.cap),
                            static_cast<double>(m.ego.time_dim)});
  write_pair(w, "prototypes", m.prototypes);

  const DistributionStats& st = m.stats;
  w.vector("stats.mu_normal", st.mu_normal);
  w.vector("stats.mu_abnormal", st.mu_abnormal);
  w.matrix("stats.sigma_normal", st.sigma_normal);
  w.matrix("stats.sigma_abnormal", st.sigma_abnormal);
  w.scalars("stats.scalars", {st.lambda_normal, st.lambda_abnormal, st.momentum,
                              st.aggregation == AggregationMode::kMean ? 0.0 : 1.0});

  const PrototypeBuffer& b = ck.buffer;
  w.scalars("buffer.layout",
            {static_cast<double>(b.capacity()), static_cast<double>(b.size()),
             b.difference_mode() == DifferenceMode::kPerDimension ? 0.0 : 1.0});
  for (std::size_t i = 0; i < b.size(); ++i) {
    write_pair(w, "buffer." + std::to_string(i), b.entries()[i]);
  }
  for (const auto& [key, value] : ck.metadata) w.text("meta." + key, value);

  w.header(kEnd, "");
  w.put(fnv1a(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes.data(), bytes.size());
  if (std::memcmp(r.take(sizeof kMagic), kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }

  Contents c;
  for (;;) {
    const auto kind = r.get<std::uint8_t>();
    const auto name_len = r.get<std::uint32_t>();
    const auto* name_ptr = r.take(name_len);
    std::string name(reinterpret_cast<const char*>(name_ptr), name_len);
    if (kind == kEnd) break;
    if (kind == kArray) {
      Array a;
      const auto rank = r.get<std::uint32_t>();
      std::uint64_t count = 1;
      for (std::uint32_t k = 0; k < rank; ++k) {
        a.dims.push_back(r.get<std::uint64_t>());
        count *= a.dims.back();
      }
      if (count > r.remaining() / sizeof(double)) throw FormatError("checkpoint truncated");
      a.values.resize(count);
      std::memcpy(a.values.data(), r.take(count * sizeof(double)), count * sizeof(double));
      c.arrays[name] = std::move(a);
    } else if (kind == kString) {
      const auto len = r.get<std::uint64_t>();
      if (len > r.remaining()) throw FormatError("checkpoint truncated");
      const auto* p = r.take(len);
      c.strings[name] = std::string(reinterpret_cast<const char*>(p), len);
    } else {
      throw FormatError("unknown checkpoint record kind " + std::to_string(kind));
    }
  }
  const std::size_t body = r.position();
  const auto checksum = r.get<std::uint64_t>();
  if (checksum != fnv1a(bytes.data(), body)) throw FormatError("checkpoint checksum mismatch");
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint end record");

  Checkpoint ck;
  const auto& shape = c.array("encoder.shape").values;
  if (shape.size() < 5) throw FormatError("checkpoint encoder shape is incomplete");
  EncoderConfig ec;
  ec.input_dim = as_size(shape[0], "input_dim");
  ec.attention_dim = as_size(shape[1], "attention_dim");
  ec.prototype_dim = as_size(shape[2], "prototype_dim");
  ec.activation = shape[3] == 0.0 ? Activation::kRelu : Activation::kIdentity;
  ec.layer_dims.clear();
  for (std::size_t i = 4; i < shape.size(); ++i) ec.layer_dims.push_back(as_size(shape[i], "layer dim"));
  try {
    ck.model.encoder = EncoderParams(ec);
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint encoder shape invalid: ") + e.what());
  }
  ck.model.encoder.values() = c.vector("encoder.values", ck.model.encoder.size());

  const auto& ego = c.array("ego.options", 3).values;
  ck.model.ego = {as_size(ego[0], "hops"), as_size(ego[1], "cap"), as_size(ego[2], "time_dim")};

  const std::size_t d = ec.prototype_dim;
  ck.model.prototypes = read_pair(c, "prototypes", d);
  DistributionStats& st = ck.model.stats;
  st.mu_normal = c.vector("stats.mu_normal", d);
  st.mu_abnormal = c.vector("stats.mu_abnormal", d);
  st.sigma_normal = c.matrix("stats.sigma_normal", d, d);
  st.sigma_abnormal = c.matrix("stats.sigma_abnormal", d, d);
  const auto& sc = c.array("stats.scalars", 4).values;
  st.lambda_normal = sc[0];
  st.lambda_abnormal = sc[1];
  st.momentum = sc[2];
  st.aggregation = sc[3] == 0.0 ? AggregationMode::kMean : AggregationMode::kSum;

  const auto& layout = c.array("buffer.layout", 3).values;
  const std::size_t capacity = as_size(layout[0], "buffer capacity");
  const std::size_t count = as_size(layout[1], "buffer size");
  if (count > capacity) throw FormatError("checkpoint buffer exceeds its capacity");
  if (capacity > 0) {
    ck.buffer = PrototypeBuffer(capacity, layout[2] == 0.0 ? DifferenceMode::kPerDimension
                                                          : DifferenceMode::kEuclidean);
  }
  std::vector<PrototypePair> entries;
  for (std::size_t i = 0; i < count; ++i) entries.push_back(read_pair(c, "buffer." + std::to_string(i), d));
  ck.buffer.restore(std::move(entries));

  for (const auto& [key, value] : c.strings) {
    if (key.rfind("meta.", 0) == 0) ck.metadata[key.substr(5)] = value;
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace dgad
