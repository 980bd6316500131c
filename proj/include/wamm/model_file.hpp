// Copyright (C) 2026 the wamm project authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WAMM_MODEL_FILE_HPP
#define WAMM_MODEL_FILE_HPP

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "wamm/error.hpp"
#include "wamm/gbdt.hpp"

// .wamm binary container: little-endian, CRC-32-checked. The exact byte
// layout is documented in docs/model_format.md.

static_assert(std::endian::native == std::endian::little,
              "the .wamm container writer assumes a little-endian host");

namespace wamm {

namespace model_detail {

constexpr char kMagic[4] = {'W', 'A', 'M', 'M'};
constexpr uint32_t kFormatMajor = 1;
constexpr uint32_t kFormatMinor = 0;

inline uint32_t crc32(std::string_view data) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t c = 0xFFFFFFFFu;
    for (unsigned char b : data) c = table[(c ^ b) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

struct Writer {
    std::string buf;

    void u8(uint8_t v) { buf.push_back(static_cast<char>(v)); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<uint32_t>(s.size()));
        buf.append(s);
    }
};

struct Reader {
    std::string_view buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw ValidationError("CorruptFile", "unexpected end of model file");
    }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(buf[pos++]);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    int32_t i32() { return static_cast<int32_t>(u32()); }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s(buf.substr(pos, n));
        pos += n;
        return s;
    }
};

} // namespace model_detail

inline std::string serialize_model(const GbdtModel& m) {
    model_detail::Writer w;
    w.str(m.format_version);

    w.u32(static_cast<uint32_t>(m.classes.size()));
    for (AttackClass c : m.classes) w.str(class_name(c));
    for (double b : m.base_score) w.f64(b);
    w.f64(m.learning_rate);

    w.u32(static_cast<uint32_t>(m.feature_schema.size()));
    for (const auto& name : m.feature_schema) w.str(name);
    w.u64(m.sparse_width);

    w.str(m.pipeline.schema_version);
    const auto& vec = m.pipeline.vectorizer;
    w.u8(vec.fitted() ? 1 : 0);
    if (vec.fitted()) {
        w.u32(static_cast<uint32_t>(vec.ngram_lo()));
        w.u32(static_cast<uint32_t>(vec.ngram_hi()));
        w.u64(vec.fingerprint());
        w.u32(static_cast<uint32_t>(vec.vocabulary_size()));
        for (size_t i = 0; i < vec.vocabulary_size(); ++i) {
            w.str(vec.terms()[i]);
            w.f64(vec.idf()[i]);
        }
    }

    w.u32(static_cast<uint32_t>(m.completed_rounds()));
    w.u32(static_cast<uint32_t>(m.classes.size()));
    for (const auto& tree : m.trees) {
        w.u32(static_cast<uint32_t>(tree.nodes.size()));
        for (const auto& n : tree.nodes) {
            w.i32(n.feature);
            w.f64(n.threshold);
            w.i32(n.left);
            w.i32(n.right);
            w.f64(n.leaf_value);
        }
    }

    std::string out;
    out.append(model_detail::kMagic, 4);
    model_detail::Writer head;
    head.u32(model_detail::kFormatMajor);
    head.u32(model_detail::kFormatMinor);
    head.u64(w.buf.size());
    out += head.buf;
    out += w.buf;
    model_detail::Writer crc;
    crc.u32(model_detail::crc32(w.buf));
    out += crc.buf;
    return out;
}

inline GbdtModel deserialize_model(std::string_view bytes) {
    if (bytes.size() < 20 || std::string_view(bytes.data(), 4) != std::string_view(model_detail::kMagic, 4))
        throw ValidationError("CorruptFile", "not a .wamm model file");
    model_detail::Reader r{bytes, 4};
    uint32_t major = r.u32();
    uint32_t minor = r.u32();
    (void)minor;
    if (major != model_detail::kFormatMajor)
        throw ValidationError("VersionMismatch",
                              "model format major version " + std::to_string(major) +
                                  " is not supported");
    uint64_t payload_len = r.u64();
    r.need(payload_len + 4);
    std::string_view payload = bytes.substr(r.pos, payload_len);
    model_detail::Reader tail{bytes, r.pos + payload_len};
    uint32_t stored_crc = tail.u32();
    if (tail.pos != bytes.size())
        throw ValidationError("CorruptFile", "trailing bytes after model payload");
    if (model_detail::crc32(payload) != stored_crc)
        throw ValidationError("CorruptFile", "model checksum mismatch");

    model_detail::Reader p{payload, 0};
    GbdtModel m;
    m.format_version = p.str();

    uint32_t k = p.u32();
    for (uint32_t i = 0; i < k; ++i) {
        auto cls = parse_class(p.str());
        if (!cls) throw ValidationError("CorruptFile", "unknown class name in model file");
        m.classes.push_back(*cls);
    }
    m.base_score.resize(k);
    for (uint32_t i = 0; i < k; ++i) m.base_score[i] = p.f64();
    m.learning_rate = p.f64();

    uint32_t schema_n = p.u32();
    for (uint32_t i = 0; i < schema_n; ++i) m.feature_schema.push_back(p.str());
    m.sparse_width = p.u64();

    m.pipeline.schema_version = p.str();
    if (p.u8()) {
        size_t n_lo = p.u32();
        size_t n_hi = p.u32();
        uint64_t fingerprint = p.u64();
        uint32_t vocab = p.u32();
        std::vector<std::string> terms;
        std::vector<double> idf;
        terms.reserve(vocab);
        idf.reserve(vocab);
        for (uint32_t i = 0; i < vocab; ++i) {
            terms.push_back(p.str());
            idf.push_back(p.f64());
        }
        m.pipeline.vectorizer = TfidfVectorizer::from_parts(std::move(terms), std::move(idf), n_lo,
                                                            n_hi, fingerprint);
        if (m.sparse_width != m.pipeline.vectorizer.vocabulary_size())
            throw ValidationError("CorruptFile", "sparse width does not match vocabulary size");
    }

    uint32_t rounds = p.u32();
    uint32_t k2 = p.u32();
    if (k2 != k) throw ValidationError("CorruptFile", "inconsistent class count in tree section");
    for (uint64_t t = 0; t < static_cast<uint64_t>(rounds) * k; ++t) {
        RegressionTree tree;
        uint32_t n_nodes = p.u32();
        tree.nodes.reserve(n_nodes);
        for (uint32_t i = 0; i < n_nodes; ++i) {
            TreeNode node;
            node.feature = p.i32();
            node.threshold = p.f64();
            node.left = p.i32();
            node.right = p.i32();
            node.leaf_value = p.f64();
            if (node.feature >= 0 &&
                (node.feature >= static_cast<int32_t>(m.width()) || node.left < 0 || node.right < 0 ||
                 node.left >= static_cast<int32_t>(n_nodes) || node.right >= static_cast<int32_t>(n_nodes)))
                throw ValidationError("CorruptFile", "tree node references out of range");
            tree.nodes.push_back(node);
        }
        m.trees.push_back(std::move(tree));
    }
    if (p.pos != payload.size())
        throw ValidationError("CorruptFile", "trailing bytes in model payload");
    return m;
}

inline void save_model(const GbdtModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("FileNotFound", "cannot write " + path);
    std::string bytes = serialize_model(m);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("FileNotFound", "write failed: " + path);
}

inline GbdtModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("FileNotFound", path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace wamm

#endif // WAMM_MODEL_FILE_HPP
