#include "core/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "core/crc32.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");

namespace fnetae {

namespace {

using nlohmann::json;

class Writer {
public:
    void raw(const void* data, size_t len) {
        const auto* p = static_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + len);
    }
    void u8(uint8_t v) { raw(&v, 1); }
    void u16(uint16_t v) { raw(&v, 2); }
    void u32(uint32_t v) { raw(&v, 4); }

    void tensor(const std::string& name, const Tensor<float>& t) {
        if (name.size() > 0xffff) throw std::invalid_argument("tensor name too long: " + name);
        u16(static_cast<uint16_t>(name.size()));
        raw(name.data(), name.size());
        u8(static_cast<uint8_t>(t.rank()));
        for (int64_t d : t.shape()) u32(static_cast<uint32_t>(d));
        raw(t.data(), static_cast<size_t>(t.numel()) * sizeof(float));
    }

    void finish_to(const std::filesystem::path& path) {
        u32(crc32(buf_.data(), buf_.size()));
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
    }

private:
    std::vector<char> buf_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open checkpoint: " + path_);
        buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    void raw(void* out, size_t len) {
        if (pos_ + len > buf_.size())
            throw std::runtime_error(path_ + ": truncated checkpoint at offset " + std::to_string(pos_) +
                                     " (need " + std::to_string(len) + " bytes, have " +
                                     std::to_string(buf_.size() - pos_) + ")");
        std::memcpy(out, buf_.data() + pos_, len);
        pos_ += len;
    }
    uint8_t u8() { uint8_t v; raw(&v, 1); return v; }
    uint16_t u16() { uint16_t v; raw(&v, 2); return v; }
    uint32_t u32() { uint32_t v; raw(&v, 4); return v; }

    std::pair<std::string, Tensor<float>> tensor() {
        const uint16_t name_len = u16();
        std::string name(name_len, '\0');
        raw(name.data(), name_len);
        const uint8_t rank = u8();
        Shape shape(rank);
        for (auto& d : shape) d = static_cast<int64_t>(u32());
        Tensor<float> t(std::move(shape));
        raw(t.data(), static_cast<size_t>(t.numel()) * sizeof(float));
        return {std::move(name), std::move(t)};
    }

    void verify_crc() {
        if (buf_.size() < pos_ + 4)
            throw std::runtime_error(path_ + ": truncated checkpoint at offset " + std::to_string(pos_) +
                                     " (missing CRC32)");
        const uint32_t expected = crc32(buf_.data(), pos_);
        const uint32_t stored = u32();
        if (stored != expected)
            throw std::runtime_error(path_ + ": CRC mismatch (stored " + std::to_string(stored) + ", computed " +
                                     std::to_string(expected) + ")");
        if (pos_ != buf_.size())
            throw std::runtime_error(path_ + ": " + std::to_string(buf_.size() - pos_) + " trailing bytes after CRC");
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::vector<char> buf_;
    size_t pos_ = 0;
};

std::string hex_u64(uint64_t v) {
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(v));
    return out;
}

uint64_t parse_hex_u64(const std::string& s) { return std::stoull(s, nullptr, 16); }

json config_json(const ModelConfig& c) {
    return json{{"vocab_size", c.vocab_size},     {"max_len", c.max_len},       {"embed_dim", c.embed_dim},
                {"latent_dim", c.latent_dim},     {"num_heads", c.num_heads},   {"key_dim", c.key_dim},
                {"dropout_rate", c.dropout_rate}, {"norm_eps", c.norm_eps}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.vocab_size = j.at("vocab_size").get<int32_t>();
    c.max_len = j.at("max_len").get<int32_t>();
    c.embed_dim = j.at("embed_dim").get<int32_t>();
    c.latent_dim = j.at("latent_dim").get<int32_t>();
    c.num_heads = j.at("num_heads").get<int32_t>();
    c.key_dim = j.at("key_dim").get<int32_t>();
    c.dropout_rate = j.at("dropout_rate").get<float>();
    c.norm_eps = j.at("norm_eps").get<float>();
    return c;
}

}  // namespace

void checkpoint_save(const std::filesystem::path& path, const ModelState& state) {
    json meta;
    meta["model"] = config_json(state.config);
    meta["vocab"] = state.vocab.tokens();
    meta["epoch"] = state.epoch;
    meta["adam"] = {{"learning_rate", state.adam.hyper().learning_rate},
                    {"beta1", state.adam.hyper().beta1},
                    {"beta2", state.adam.hyper().beta2},
                    {"eps", state.adam.hyper().eps},
                    {"step", state.adam.step_count()}};
    json rng_state = json::array();
    for (uint64_t w : state.rng.state()) rng_state.push_back(hex_u64(w));
    meta["rng"] = rng_state;
    const std::string meta_str = meta.dump();

    Writer w;
    w.raw(kCheckpointMagic, sizeof(kCheckpointMagic));
    w.u32(kCheckpointVersion);
    w.u32(static_cast<uint32_t>(meta_str.size()));
    w.raw(meta_str.data(), meta_str.size());

    w.u32(static_cast<uint32_t>(state.params.size()));
    for (const auto& name : state.params.names()) w.tensor(name, state.params.at(name));

    // moment tensors in parameter order, m then v per parameter
    uint32_t opt_count = 0;
    for (const auto& name : state.params.names())
        if (state.adam.has_state(name)) opt_count += 2;
    w.u32(opt_count);
    for (const auto& name : state.params.names()) {
        if (!state.adam.has_state(name)) continue;
        w.tensor("m:" + name, state.adam.first_moment(name));
        w.tensor("v:" + name, state.adam.second_moment(name));
    }
    w.finish_to(path);
}

ModelState checkpoint_load(const std::filesystem::path& path) {
    Reader r(path);

    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw std::runtime_error(r.path() + ": bad magic bytes, expected \"FNAE\"");
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw std::runtime_error(r.path() + ": unsupported checkpoint version " + std::to_string(version) +
                                 " (expected " + std::to_string(kCheckpointVersion) + ")");

    const uint32_t meta_len = r.u32();
    std::string meta_str(meta_len, '\0');
    r.raw(meta_str.data(), meta_len);
    json meta = json::parse(meta_str);

    ModelState state;
    state.config = config_from_json(meta.at("model"));
    state.config.validate();
    state.vocab = Vocabulary::from_tokens(meta.at("vocab").get<std::vector<std::string>>());
    state.epoch = meta.at("epoch").get<int32_t>();

    AdamHyper hyper;
    hyper.learning_rate = meta.at("adam").at("learning_rate").get<double>();
    hyper.beta1 = meta.at("adam").at("beta1").get<double>();
    hyper.beta2 = meta.at("adam").at("beta2").get<double>();
    hyper.eps = meta.at("adam").at("eps").get<double>();
    state.adam = Adam<float>(hyper);
    state.adam.set_step_count(meta.at("adam").at("step").get<int64_t>());

    Rng::State rng_state;
    const auto rng_json = meta.at("rng");
    if (!rng_json.is_array() || rng_json.size() != rng_state.size())
        throw std::runtime_error(r.path() + ": malformed rng state");
    for (size_t i = 0; i < rng_state.size(); ++i) rng_state[i] = parse_hex_u64(rng_json[i].get<std::string>());
    state.rng.set_state(rng_state);

    const uint32_t param_count = r.u32();
    for (uint32_t i = 0; i < param_count; ++i) {
        auto [name, tensor] = r.tensor();
        state.params.add(std::move(name), std::move(tensor));
    }

    const uint32_t opt_count = r.u32();
    if (opt_count % 2 != 0) throw std::runtime_error(r.path() + ": odd optimizer tensor count");
    for (uint32_t i = 0; i < opt_count; i += 2) {
        auto [m_name, m] = r.tensor();
        auto [v_name, v] = r.tensor();
        if (m_name.rfind("m:", 0) != 0 || v_name.rfind("v:", 0) != 0 || m_name.substr(2) != v_name.substr(2))
            throw std::runtime_error(r.path() + ": mismatched optimizer tensor pair " + m_name + " / " + v_name);
        state.adam.restore(m_name.substr(2), std::move(m), std::move(v));
    }
    r.verify_crc();

    if (state.params.scalar_count() != count_params(state.config))
        throw std::runtime_error(r.path() + ": parameter count does not match config");
    state.plan = MixingPlan<float>::make(state.config.max_len);
    return state;
}

}  // namespace fnetae
