#include "core/model.hpp"

namespace fnetae {

std::vector<ParamSpec> param_layout(const ModelConfig& cfg) {
    cfg.validate();
    const int64_t v = cfg.vocab_size, l = cfg.max_len, e = cfg.embed_dim, d = cfg.latent_dim;
    const int64_t hk = static_cast<int64_t>(cfg.num_heads) * cfg.effective_key_dim();

    std::vector<ParamSpec> specs;
    auto ffn = [&](const std::string& prefix) {
        specs.push_back({prefix + ".w1", {e, d}, InitKind::glorot_uniform});
        specs.push_back({prefix + ".b1", {d}, InitKind::zeros});
        specs.push_back({prefix + ".w2", {d, e}, InitKind::glorot_uniform});
        specs.push_back({prefix + ".b2", {e}, InitKind::zeros});
    };
    auto norm = [&](const std::string& prefix) {
        specs.push_back({prefix + ".gamma", {e}, InitKind::ones});
        specs.push_back({prefix + ".beta", {e}, InitKind::zeros});
    };
    auto attention = [&](const std::string& prefix) {
        for (const char* part : {".wq", ".wk", ".wv"}) specs.push_back({prefix + part, {e, hk}, InitKind::glorot_uniform});
        for (const char* part : {".bq", ".bk", ".bv"}) specs.push_back({prefix + part, {hk}, InitKind::zeros});
        specs.push_back({prefix + ".wo", {hk, e}, InitKind::glorot_uniform});
        specs.push_back({prefix + ".bo", {e}, InitKind::zeros});
    };

    specs.push_back({"enc.tok_embed", {v, e}, InitKind::uniform_embedding});
    specs.push_back({"enc.pos_embed", {l, e}, InitKind::uniform_embedding});
    ffn("enc.ffn");
    norm("enc.norm1");
    norm("enc.norm2");

    specs.push_back({"dec.tok_embed", {v, e}, InitKind::uniform_embedding});
    specs.push_back({"dec.pos_embed", {l, e}, InitKind::uniform_embedding});
    attention("dec.self_attn");
    attention("dec.cross_attn");
    ffn("dec.ffn");
    norm("dec.norm1");
    norm("dec.norm2");
    norm("dec.norm3");

    specs.push_back({"out.w", {e, v}, InitKind::glorot_uniform});
    specs.push_back({"out.b", {v}, InitKind::zeros});
    return specs;
}

}  // namespace fnetae
