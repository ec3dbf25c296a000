#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/fourier.hpp"
#include "core/graph.hpp"
#include "core/params.hpp"

namespace fnetae {

// Architecture hyperparameters. The defaults are the full configuration:
// one Fourier-mixing encoder block and one decoder block with causal self-
// and cross-attention, 4,977,808 trainable scalars in total.
struct ModelConfig {
    int32_t vocab_size = 10000;
    int32_t max_len = 150;
    int32_t embed_dim = 128;
    int32_t latent_dim = 64;  // FFN bottleneck width
    int32_t num_heads = 8;
    int32_t key_dim = 0;  // 0 -> embed_dim
    float dropout_rate = 0.5f;
    float norm_eps = 1e-3f;

    int32_t effective_key_dim() const { return key_dim > 0 ? key_dim : embed_dim; }

    void validate() const {
        if (vocab_size < 5) throw std::invalid_argument("vocab_size must be >= 5");
        if (max_len < 2) throw std::invalid_argument("max_len must be >= 2");
        if (embed_dim < 1 || latent_dim < 1 || num_heads < 1 || effective_key_dim() < 1)
            throw std::invalid_argument("embed_dim, latent_dim, num_heads and key_dim must be >= 1");
        if (!(dropout_rate >= 0.0f && dropout_rate < 1.0f))
            throw std::invalid_argument("dropout_rate must be in [0, 1)");
        if (!(norm_eps > 0.0f)) throw std::invalid_argument("norm_eps must be > 0");
    }

    bool operator==(const ModelConfig&) const = default;
};

// Closed-form trainable scalar count; init_params over param_layout allocates
// exactly this many.
inline int64_t count_params(const ModelConfig& cfg) {
    cfg.validate();
    const int64_t v = cfg.vocab_size, l = cfg.max_len, e = cfg.embed_dim, d = cfg.latent_dim;
    const int64_t hk = static_cast<int64_t>(cfg.num_heads) * cfg.effective_key_dim();
    const int64_t embeddings = 2 * (v * e + l * e);
    const int64_t ffn = e * d + d + d * e + e;
    const int64_t encoder = ffn + 2 * 2 * e;
    const int64_t attention = 3 * (e * hk + hk) + hk * e + e;
    const int64_t decoder = 2 * attention + ffn + 3 * 2 * e;
    const int64_t projection = e * v + v;
    return embeddings + encoder + decoder + projection;
}

std::vector<ParamSpec> param_layout(const ModelConfig& cfg);

// Node handles for one forward pass; parameters are re-bound as graph leaves
// each step so their gradients can be read back by name.
template <typename T>
struct BoundParams {
    std::unordered_map<std::string, typename Graph<T>::NodeId> node;

    typename Graph<T>::NodeId at(const std::string& name) const {
        auto it = node.find(name);
        if (it == node.end()) throw std::out_of_range("unbound parameter: " + name);
        return it->second;
    }
};

template <typename T>
BoundParams<T> bind_params(Graph<T>& g, const ParamStore<T>& params, bool needs_grad = true) {
    BoundParams<T> bound;
    for (const auto& name : params.names()) bound.node.emplace(name, g.leaf(params.at(name), needs_grad));
    return bound;
}

namespace detail {

// Multi-head attention: per head, softmax(q k^T / sqrt(K)) v; heads are
// concatenated and projected back to the embedding width. No padding mask.
template <typename T>
typename Graph<T>::NodeId multi_head_attention(Graph<T>& g, const BoundParams<T>& p, const std::string& prefix,
                                               typename Graph<T>::NodeId query, typename Graph<T>::NodeId kv,
                                               const ModelConfig& cfg, bool causal) {
    const int64_t batch = g.value(query).dim(0);
    const int64_t lq = g.value(query).dim(1);
    const int64_t lk = g.value(kv).dim(1);
    const int64_t heads = cfg.num_heads;
    const int64_t key = cfg.effective_key_dim();

    auto project = [&](typename Graph<T>::NodeId x, int64_t len, const char* w, const char* b) {
        auto h = g.add(g.matmul(x, p.at(prefix + w)), p.at(prefix + b));
        return g.swap_mid_axes(g.reshape(h, {batch, len, heads, key}));  // (B, H, len, K)
    };
    auto q = project(query, lq, ".wq", ".bq");
    auto k = project(kv, lk, ".wk", ".bk");
    auto v = project(kv, lk, ".wv", ".bv");

    auto scores = g.scale(g.matmul(q, k, /*transpose_b=*/true), T(1) / std::sqrt(static_cast<T>(key)));
    auto probs = g.softmax_lastdim(scores, causal);
    auto context = g.matmul(probs, v);  // (B, H, Lq, K)
    auto merged = g.reshape(g.swap_mid_axes(context), {batch, lq, heads * key});
    return g.add(g.matmul(merged, p.at(prefix + ".wo")), p.at(prefix + ".bo"));
}

// Position-wise E -> D -> E projection with relu in the bottleneck.
template <typename T>
typename Graph<T>::NodeId feed_forward(Graph<T>& g, const BoundParams<T>& p, const std::string& prefix,
                                       typename Graph<T>::NodeId x) {
    auto h = g.relu(g.add(g.matmul(x, p.at(prefix + ".w1")), p.at(prefix + ".b1")));
    return g.add(g.matmul(h, p.at(prefix + ".w2")), p.at(prefix + ".b2"));
}

template <typename T>
typename Graph<T>::NodeId norm(Graph<T>& g, const BoundParams<T>& p, const std::string& prefix,
                               typename Graph<T>::NodeId x, const ModelConfig& cfg) {
    return g.layer_norm(x, p.at(prefix + ".gamma"), p.at(prefix + ".beta"), static_cast<T>(cfg.norm_eps));
}

}  // namespace detail

// Token row + learned position row, summed.
template <typename T>
typename Graph<T>::NodeId positional_embed(Graph<T>& g, typename Graph<T>::NodeId tok_table,
                                           typename Graph<T>::NodeId pos_table, std::span<const int32_t> ids,
                                           int64_t batch, int64_t seq_len) {
    if (static_cast<int64_t>(ids.size()) != batch * seq_len)
        throw std::invalid_argument("positional_embed: expected " + std::to_string(batch * seq_len) + " ids, got " +
                                    std::to_string(ids.size()));
    auto tok = g.embedding(tok_table, std::vector<int32_t>(ids.begin(), ids.end()), {batch, seq_len});
    return g.add(tok, pos_table);
}

// Encoder: h = norm1(x + mix(x)); out = norm2(h + ffn(h)). No dropout here.
template <typename T>
typename Graph<T>::NodeId fnet_encoder_block(Graph<T>& g, const BoundParams<T>& p, typename Graph<T>::NodeId x,
                                             const ModelConfig& cfg, const MixingPlan<T>& plan) {
    auto mixed = g.fourier_mix(x, plan);
    auto h = detail::norm(g, p, "enc.norm1", g.add(x, mixed), cfg);
    auto ff = detail::feed_forward(g, p, "enc.ffn", h);
    return detail::norm(g, p, "enc.norm2", g.add(h, ff), cfg);
}

// Decoder: causal self-attention, cross-attention over the encoder output,
// then the feed-forward projection, each behind a residual + norm.
template <typename T>
typename Graph<T>::NodeId decoder_block(Graph<T>& g, const BoundParams<T>& p, typename Graph<T>::NodeId dec_x,
                                        typename Graph<T>::NodeId enc_out, const ModelConfig& cfg) {
    auto self_attn = detail::multi_head_attention(g, p, "dec.self_attn", dec_x, dec_x, cfg, /*causal=*/true);
    auto a = detail::norm(g, p, "dec.norm1", g.add(dec_x, self_attn), cfg);
    auto cross = detail::multi_head_attention(g, p, "dec.cross_attn", a, enc_out, cfg, /*causal=*/false);
    auto b = detail::norm(g, p, "dec.norm2", g.add(a, cross), cfg);
    auto ff = detail::feed_forward(g, p, "dec.ffn", b);
    return detail::norm(g, p, "dec.norm3", g.add(b, ff), cfg);
}

// Full forward pass to vocabulary logits. Softmax lives in the loss, not
// here. Dropout is applied to the decoder output only in training mode.
template <typename T>
typename Graph<T>::NodeId model_forward(Graph<T>& g, const BoundParams<T>& p, const ModelConfig& cfg,
                                        const MixingPlan<T>& plan, std::span<const int32_t> enc_ids,
                                        std::span<const int32_t> dec_ids, int64_t batch, bool train_mode = false,
                                        Rng* rng = nullptr) {
    const int64_t l = cfg.max_len;
    auto enc_x = positional_embed(g, p.at("enc.tok_embed"), p.at("enc.pos_embed"), enc_ids, batch, l);
    auto enc_out = fnet_encoder_block(g, p, enc_x, cfg, plan);

    auto dec_x = positional_embed(g, p.at("dec.tok_embed"), p.at("dec.pos_embed"), dec_ids, batch, l);
    auto dec_out = decoder_block(g, p, dec_x, enc_out, cfg);
    dec_out = g.dropout(dec_out, static_cast<T>(cfg.dropout_rate), rng, train_mode);
    return g.add(g.matmul(dec_out, p.at("out.w")), p.at("out.b"));
}

}  // namespace fnetae
