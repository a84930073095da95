#include "tdcnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace tdcnn {

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  const std::vector<std::uint8_t>& buffer() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}

  const std::uint8_t* take(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) {
      throw CheckpointError(CheckpointError::Kind::Truncated,
                            std::string("checkpoint truncated while reading ") + what);
    }
    const std::uint8_t* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  template <typename U>
  U le(const char* what) {
    const std::uint8_t* p = take(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
    return v;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

template <typename T>
void write_payload(Writer& w, const Tensor<T>& t) {
  for (T v : t.data()) {
    if constexpr (std::is_same_v<T, float>) {
      w.le(std::bit_cast<std::uint32_t>(v));
    } else {
      w.le(std::bit_cast<std::uint64_t>(v));
    }
  }
}

template <typename T>
Model<T> read_params(Reader& r, ModelSpec spec, std::uint64_t seed) {
  Model<T> model = Model<T>::zeros(std::move(spec), seed);
  for (auto& p : model.parameters()) {
    const auto name_len = r.le<std::uint16_t>("parameter name length");
    const auto* name = r.take(name_len, "parameter name");
    if (std::string(reinterpret_cast<const char*>(name), name_len) != p.name) {
      throw CheckpointError(CheckpointError::Kind::Malformed,
                            "checkpoint parameter order differs: expected " + p.name);
    }
    const auto rank = r.le<std::uint8_t>("parameter rank");
    Shape shape(rank);
    for (auto& e : shape) e = r.le<std::uint32_t>("parameter extents");
    if (shape != p.value->shape()) {
      throw CheckpointError(CheckpointError::Kind::Malformed,
                            "checkpoint parameter " + p.name + " has shape " + to_string(shape) +
                                ", spec implies " + to_string(p.value->shape()));
    }
    for (T& v : p.value->data()) {
      if constexpr (std::is_same_v<T, float>) {
        v = std::bit_cast<float>(r.le<std::uint32_t>("parameter payload"));
      } else {
        v = std::bit_cast<double>(r.le<std::uint64_t>("parameter payload"));
      }
    }
  }
  if (!r.at_end()) throw CheckpointError(CheckpointError::Kind::Malformed, "checkpoint has trailing bytes");
  return model;
}

template <typename To, typename From>
Model<To> convert(const Model<From>& src) {
  Model<To> out = Model<To>::zeros(src.spec(), src.seed());
  const auto from = src.parameters();
  auto to = out.parameters();
  for (std::size_t i = 0; i < to.size(); ++i) *to[i].value = tensor_cast<To>(*from[i].second);
  return out;
}

}  // namespace

template <typename T>
void save_checkpoint(const Model<T>& model, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.le(kCheckpointVersion);
  const std::string meta =
      model.spec().to_text() + (std::is_same_v<T, float> ? "precision=32\n" : "precision=64\n");
  w.le(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta.data(), meta.size());
  w.le(model.seed());
  for (const auto& [name, t] : model.parameters()) {
    w.le(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.le(static_cast<std::uint8_t>(t->rank()));
    for (auto e : t->shape()) w.le(static_cast<std::uint32_t>(e));
    write_payload(w, *t);
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError(CheckpointError::Kind::Io, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.buffer().size()));
  if (!os) throw CheckpointError(CheckpointError::Kind::Io, "failed writing " + path.string());
}

AnyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError(CheckpointError::Kind::Io, "cannot open checkpoint " + path.string());
  Reader r(std::vector<std::uint8_t>(std::istreambuf_iterator<char>(is), {}));

  if (std::memcmp(r.take(sizeof kCheckpointMagic, "magic"), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
    throw CheckpointError(CheckpointError::Kind::BadMagic, "bad magic: " + path.string() + " is not a checkpoint");
  }
  const auto version = r.le<std::uint8_t>("format version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "checkpoint version mismatch: file has " + std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  const auto meta_len = r.le<std::uint32_t>("metadata length");
  std::string meta(reinterpret_cast<const char*>(r.take(meta_len, "metadata")), meta_len);

  std::string precision = "32";
  const auto pos = meta.find("precision=");
  if (pos != std::string::npos) {
    const auto end = meta.find('\n', pos);
    precision = meta.substr(pos + 10, end - pos - 10);
    meta.erase(pos, end == std::string::npos ? std::string::npos : end - pos + 1);
  }
  ModelSpec spec;
  try {
    spec = ModelSpec::from_text(meta);
    spec.validate();
  } catch (const Error& e) {
    throw CheckpointError(CheckpointError::Kind::Malformed, std::string("checkpoint metadata: ") + e.what());
  }
  const auto seed = r.le<std::uint64_t>("seed");
  if (precision == "32") return read_params<float>(r, std::move(spec), seed);
  if (precision == "64") return read_params<double>(r, std::move(spec), seed);
  throw CheckpointError(CheckpointError::Kind::Malformed, "checkpoint precision '" + precision + "' unknown");
}

template <typename T>
Model<T> load_checkpoint_as(const std::filesystem::path& path) {
  return std::visit(
      [](auto&& m) -> Model<T> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Model<T>>) {
          return std::move(m);
        } else if constexpr (std::is_same_v<M, Model<float>>) {
          return convert<T, float>(m);
        } else {
          return convert<T, double>(m);
        }
      },
      load_checkpoint(path));
}

template void save_checkpoint(const Model<float>&, const std::filesystem::path&);
template void save_checkpoint(const Model<double>&, const std::filesystem::path&);
template Model<float> load_checkpoint_as(const std::filesystem::path&);
template Model<double> load_checkpoint_as(const std::filesystem::path&);

}  // namespace tdcnn
