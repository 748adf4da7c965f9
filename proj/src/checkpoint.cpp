#include "c2rec/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace c2rec {

namespace {

constexpr const char kCheckpointMagic[] = "C2RECv1";
constexpr const char kGroundTruthMagic[] = "C2RECGT1";

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw Error("cannot write file: " + path);
    }
    ~Writer() = default;

    void bytes(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }
    void u8(std::uint8_t x) { bytes(&x, 1); }
    void u32(std::uint32_t x) { le(x); }
    void u64(std::uint64_t x) { le(x); }
    void i32(std::int32_t x) { le(static_cast<std::uint32_t>(x)); }
    void i64(std::int64_t x) { le(static_cast<std::uint64_t>(x)); }
    void f32(float x) { le(std::bit_cast<std::uint32_t>(x)); }
    void f64(double x) { le(std::bit_cast<std::uint64_t>(x)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void close() {
        out_.flush();
        if (!out_) throw Error("write failed: " + path_);
    }

private:
    template <typename T>
    void le(T x) {
        unsigned char buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf[i] = static_cast<unsigned char>(x >> (8 * i));
        }
        bytes(buf, sizeof(T));
    }

    std::ofstream out_;
    std::string path_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw Error("cannot open file: " + path);
    }

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) {
            throw Error("truncated file: " + path_);
        }
    }
    std::uint8_t u8() {
        std::uint8_t x;
        bytes(&x, 1);
        return x;
    }
    std::uint32_t u32() { return le<std::uint32_t>(); }
    std::uint64_t u64() { return le<std::uint64_t>(); }
    std::int32_t i32() { return static_cast<std::int32_t>(le<std::uint32_t>()); }
    std::int64_t i64() { return static_cast<std::int64_t>(le<std::uint64_t>()); }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
    std::string str() {
        const auto n = u32();
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

private:
    template <typename T>
    T le() {
        unsigned char buf[sizeof(T)];
        bytes(buf, sizeof(T));
        T x = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            x |= static_cast<T>(buf[i]) << (8 * i);
        }
        return x;
    }

    std::ifstream in_;
    std::string path_;
};

void write_tensor(Writer& w, const TensorRef& ref) {
    w.str(ref.name);
    w.u32(static_cast<std::uint32_t>(ref.shape.size()));
    for (std::size_t dim : ref.shape) w.u64(dim);
    for (std::size_t i = 0; i < ref.size; ++i) w.f32(static_cast<float>(ref.data[i]));
}

void read_tensor_into(Reader& r, const TensorRef& ref) {
    const std::string name = r.str();
    if (name != ref.name) {
        throw Error("checkpoint tensor mismatch: expected '" + ref.name + "', found '" + name +
                    "'");
    }
    const auto ndim = r.u32();
    if (ndim != ref.shape.size()) throw Error("tensor '" + name + "': rank mismatch");
    std::size_t total = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
        const auto dim = static_cast<std::size_t>(r.u64());
        if (dim != ref.shape[i]) throw Error("tensor '" + name + "': shape mismatch");
        total *= dim;
    }
    if (total != ref.size) throw Error("tensor '" + name + "': size mismatch");
    for (std::size_t i = 0; i < ref.size; ++i) ref.data[i] = static_cast<double>(r.f32());
}

void write_vocab(Writer& w, const std::vector<std::string>& ids) {
    w.u64(ids.size());
    for (const auto& id : ids) w.str(id);
}

std::vector<std::string> read_vocab(Reader& r) {
    const auto n = r.u64();
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) ids.push_back(r.str());
    return ids;
}

}  // namespace

void save_checkpoint(const Parameters& params, const std::vector<std::string>& user_ids,
                     const std::vector<std::string>& item_ids, const std::string& path) {
    if (static_cast<int>(user_ids.size()) != params.n_users ||
        static_cast<int>(item_ids.size()) != params.n_items) {
        throw Error("save_checkpoint: vocab sizes do not match parameters");
    }
    Writer w(path);
    w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
    const ModelConfig& cfg = params.config;
    w.i32(cfg.d);
    w.i32(cfg.d_prime);
    w.i32(cfg.clf_hidden);
    w.f64(cfg.lambda_cls);
    w.f64(cfg.lambda_attn);
    w.u8(static_cast<std::uint8_t>(cfg.variant));
    w.i64(params.n_users);
    w.i64(params.n_items);
    write_vocab(w, user_ids);
    write_vocab(w, item_ids);

    auto refs = tensor_refs(const_cast<Parameters&>(params));
    w.u32(static_cast<std::uint32_t>(refs.size()));
    for (const auto& ref : refs) write_tensor(w, ref);
    w.close();
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[sizeof(kCheckpointMagic) - 1];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw Error("not a c2rec checkpoint: " + path);
    }
    ModelConfig cfg;
    cfg.d = r.i32();
    cfg.d_prime = r.i32();
    cfg.clf_hidden = r.i32();
    cfg.lambda_cls = r.f64();
    cfg.lambda_attn = r.f64();
    const auto variant_raw = r.u8();
    if (variant_raw > static_cast<std::uint8_t>(Variant::NoSeparation)) {
        throw Error("checkpoint has unknown variant tag");
    }
    cfg.variant = static_cast<Variant>(variant_raw);
    cfg.validate();
    const auto n_users = r.i64();
    const auto n_items = r.i64();
    if (n_users < 1 || n_items < 1) throw Error("checkpoint has empty vocabularies");

    Checkpoint ckpt;
    ckpt.user_ids = read_vocab(r);
    ckpt.item_ids = read_vocab(r);
    if (static_cast<std::int64_t>(ckpt.user_ids.size()) != n_users ||
        static_cast<std::int64_t>(ckpt.item_ids.size()) != n_items) {
        throw Error("checkpoint vocab size mismatch");
    }

    Parameters shape;
    shape.config = cfg;
    shape.n_users = static_cast<int>(n_users);
    shape.n_items = static_cast<int>(n_items);
    ckpt.params = zeros_like(shape);

    auto refs = tensor_refs(ckpt.params);
    const auto count = r.u32();
    if (count != refs.size()) throw Error("checkpoint tensor count mismatch");
    for (const auto& ref : refs) read_tensor_into(r, ref);
    return ckpt;
}

void save_ground_truth(const GroundTruth& truth, const std::string& path) {
    Writer w(path);
    w.bytes(kGroundTruthMagic, sizeof(kGroundTruthMagic) - 1);
    w.i32(static_cast<std::int32_t>(truth.shared_factors.rows));
    w.i32(static_cast<std::int32_t>(truth.item_factors.rows));
    w.i32(truth.latent_dim);
    w.f64(truth.gamma);
    auto tensor = [&](const std::string& name, const Mat& m) {
        write_tensor(w, {name, const_cast<double*>(m.a.data()), {m.rows, m.cols}, m.size()});
    };
    tensor("shared_factors", truth.shared_factors);
    tensor("off_offsets", truth.channel_offsets[idx(Channel::Off)]);
    tensor("on_offsets", truth.channel_offsets[idx(Channel::On)]);
    tensor("item_factors", truth.item_factors);
    w.close();
}

GroundTruth load_ground_truth(const std::string& path) {
    Reader r(path);
    char magic[sizeof(kGroundTruthMagic) - 1];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kGroundTruthMagic, sizeof(magic)) != 0) {
        throw Error("not a c2rec ground-truth file: " + path);
    }
    GroundTruth truth;
    const auto n_users = static_cast<std::size_t>(r.i32());
    const auto n_items = static_cast<std::size_t>(r.i32());
    truth.latent_dim = r.i32();
    truth.gamma = r.f64();
    if (truth.latent_dim < 1) throw Error("ground-truth file has bad latent dim");
    const auto f = static_cast<std::size_t>(truth.latent_dim);
    truth.shared_factors = Mat(n_users, f);
    truth.channel_offsets[0] = Mat(n_users, f);
    truth.channel_offsets[1] = Mat(n_users, f);
    truth.item_factors = Mat(n_items, f);
    auto tensor = [&](const std::string& name, Mat& m) {
        read_tensor_into(r, {name, m.a.data(), {m.rows, m.cols}, m.size()});
    };
    tensor("shared_factors", truth.shared_factors);
    tensor("off_offsets", truth.channel_offsets[idx(Channel::Off)]);
    tensor("on_offsets", truth.channel_offsets[idx(Channel::On)]);
    tensor("item_factors", truth.item_factors);
    return truth;
}

}  // namespace c2rec
