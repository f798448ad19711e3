#include "hdff/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hdff/errors.hpp"

namespace hdff {

static_assert(std::endian::native == std::endian::little, "ModelPack I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'H', 'D', 'F', 'F'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.append(buf, sizeof(T));
  }

  void put_floats(std::span<const float> values) {
    out_.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(float));
  }

  void put_raw(const char* data, std::size_t n) { out_.append(data, n); }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::vector<float> get_floats(std::size_t n, const char* what) {
    if (n > (bytes_.size() - pos_) / sizeof(float)) truncated(what);
    std::vector<float> out(n);
    std::memcpy(out.data(), bytes_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
    return out;
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(origin_ + ": at byte " + std::to_string(pos_) + ": " + what);
  }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) truncated(what);
  }

  [[noreturn]] void truncated(const char* what) const {
    fail(std::string("truncated file while reading ") + what);
  }

  const std::string& bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

void write_body(Writer& w, const FittedModel& model) {
  w.put<std::uint64_t>(model.hd_dim);
  w.put<std::uint64_t>(model.master_seed);
  w.put<std::uint8_t>(model.pooling == PoolingMode::max ? 0 : 1);

  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& s : model.layers) {
    w.put<std::int32_t>(s.layer_id);
    w.put<std::uint64_t>(s.mean.size());
    w.put<std::uint64_t>(s.count);
    w.put_floats(s.mean);
  }

  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.classes.size()));
  for (const auto& c : model.classes) {
    w.put<std::int32_t>(c.class_id);
    w.put_floats(c.descriptor.values());
  }

  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.members.size()));
  for (std::size_t e = 0; e < model.members.size(); ++e) {
    w.put<std::uint64_t>(model.binding_seeds[e]);
    write_body(w, model.members[e]);
  }
}

FittedModel read_body(Reader& r, int depth) {
  FittedModel model;
  model.hd_dim = r.get<std::uint64_t>("hd_dim");
  if (model.hd_dim == 0) r.fail("hd_dim is zero");
  model.master_seed = r.get<std::uint64_t>("master_seed");
  const auto pooling = r.get<std::uint8_t>("pooling_mode");
  if (pooling > 1) r.fail("unknown pooling mode " + std::to_string(pooling));
  model.pooling = pooling == 0 ? PoolingMode::max : PoolingMode::avg;

  const auto num_layers = r.get<std::uint32_t>("layer count");
  for (std::uint32_t l = 0; l < num_layers; ++l) {
    LayerStats s;
    s.layer_id = r.get<std::int32_t>("layer_id");
    const auto channels = r.get<std::uint64_t>("channels");
    s.count = r.get<std::uint64_t>("sample count");
    s.mean = r.get_floats(channels, "layer mean");
    model.layers.push_back(std::move(s));
  }

  const auto num_classes = r.get<std::uint32_t>("class count");
  for (std::uint32_t k = 0; k < num_classes; ++k) {
    const auto id = r.get<std::int32_t>("class_id");
    auto values = r.get_floats(model.hd_dim, "class descriptor");
    try {
      model.classes.push_back({id, HdVector(std::move(values))});
    } catch (const Error& e) {
      r.fail(std::string("invalid class descriptor: ") + e.what());
    }
  }

  const auto num_members = r.get<std::uint32_t>("ensemble member count");
  if (num_members > 0 && depth > 0) r.fail("nested ensemble");
  for (std::uint32_t e = 0; e < num_members; ++e) {
    model.binding_seeds.push_back(r.get<std::uint64_t>("binding seed"));
    model.members.push_back(read_body(r, depth + 1));
  }
  return model;
}

}  // namespace

std::string serialize_model(const FittedModel& model) {
  model.validate();
  Writer w;
  w.put_raw(kMagic, sizeof(kMagic));
  w.put<std::uint16_t>(kModelPackVersion);
  write_body(w, model);
  return w.take();
}

FittedModel deserialize_model(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(origin + ": at byte 0: bad magic, expected \"HDFF\"");
  }
  r.get<std::uint32_t>("magic");
  const auto version = r.get<std::uint16_t>("version");
  if (version != kModelPackVersion) {
    throw FormatError(origin + ": at byte 4: ModelPack version " + std::to_string(version) +
                      " is unsupported, expected " + std::to_string(kModelPackVersion));
  }
  FittedModel model = read_body(r, 0);
  if (!r.at_end()) r.fail("unexpected trailing bytes");
  try {
    model.validate();
  } catch (const FitError& e) {
    throw FormatError(origin + ": " + e.what());
  }
  return model;
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes, path.string());
}

}  // namespace hdff
