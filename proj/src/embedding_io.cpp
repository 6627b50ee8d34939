#include "gigamae/graph.hpp"

#include <cstring>
#include <fstream>

namespace gigamae {

// Cache layout (little-endian): "GGME", u32 version=1, u32 rows, u32 cols,
// then rows*cols float32 row-major. Name and extra metadata live in a sibling
// key=value file at path + ".meta".

namespace {

constexpr char kMagic[4] = {'G', 'G', 'M', 'E'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ofstream& f, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    f.write(reinterpret_cast<char*>(b), 4);
}

uint32_t get_u32(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    if (!f.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error(path + ": truncated header");
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

}  // namespace

MatD EmbeddingMatrix::to_mat() const {
    MatD m(rows, cols);
    for (size_t i = 0; i < data.size(); ++i) m.d[i] = double(data[i]);
    return m;
}

EmbeddingMatrix EmbeddingMatrix::from_mat(const std::string& name, const MatD& m) {
    EmbeddingMatrix e;
    e.name = name;
    e.rows = m.rows;
    e.cols = m.cols;
    e.data.resize(m.size());
    for (size_t i = 0; i < m.size(); ++i) e.data[i] = float(m.d[i]);
    return e;
}

void write_embedding(const std::string& path, const EmbeddingMatrix& m) {
    if (m.rows < 0 || m.cols < 0 || size_t(m.rows) * size_t(m.cols) != m.data.size())
        throw std::invalid_argument("write_embedding: inconsistent dimensions");
    if (uint64_t(m.rows) > UINT32_MAX || uint64_t(m.cols) > UINT32_MAX ||
        uint64_t(m.rows) * uint64_t(m.cols) > UINT32_MAX)
        throw std::invalid_argument("write_embedding: dimension overflow");
    for (float v : m.data)
        if (!std::isfinite(v)) throw std::invalid_argument("write_embedding: non-finite entry");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f.write(kMagic, 4);
    put_u32(f, kVersion);
    put_u32(f, uint32_t(m.rows));
    put_u32(f, uint32_t(m.cols));
    static_assert(sizeof(float) == 4);
    f.write(reinterpret_cast<const char*>(m.data.data()), std::streamsize(m.data.size() * 4));
    if (!f) throw std::runtime_error("write failed for " + path);

    std::ofstream meta(path + ".meta");
    if (!meta) throw std::runtime_error("cannot open " + path + ".meta for writing");
    meta << "name=" << m.name << "\n";
    for (const auto& [k, v] : m.meta)
        if (k != "name") meta << k << "=" << v << "\n";
}

EmbeddingMatrix read_embedding(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic");
    uint32_t version = get_u32(f, path);
    if (version != kVersion) throw std::runtime_error(path + ": unsupported version");
    uint32_t rows = get_u32(f, path), cols = get_u32(f, path);
    if (uint64_t(rows) * cols > UINT32_MAX) throw std::runtime_error(path + ": dimension overflow");

    EmbeddingMatrix m;
    m.rows = int(rows);
    m.cols = int(cols);
    m.data.resize(size_t(rows) * cols);
    if (!f.read(reinterpret_cast<char*>(m.data.data()), std::streamsize(m.data.size() * 4)))
        throw std::runtime_error(path + ": truncated payload");

    std::ifstream meta(path + ".meta");
    if (meta) {
        std::string line;
        while (std::getline(meta, line)) {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string k = line.substr(0, eq), v = line.substr(eq + 1);
            if (k == "name")
                m.name = v;
            else
                m.meta[k] = v;
        }
    }
    return m;
}

}  // namespace gigamae
