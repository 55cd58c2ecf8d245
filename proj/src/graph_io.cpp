#include <gem/graph_io.hpp>

#include <gem/detail/binary_io.hpp>

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace gem {

namespace detail {

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i)
        buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    if (!in)
        throw ParseError("truncated binary stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i]))
             << (8 * i);
    return v;
}

void put_i64(std::ostream& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}

std::int64_t get_i64(std::istream& in) {
    return static_cast<std::int64_t>(get_u64(in));
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

double get_f64(std::istream& in) {
    std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_str(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in) {
    auto len = get_u64(in);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in)
        throw ParseError("truncated binary stream");
    return s;
}

void put_matrix(std::ostream& out, const Matrix& m) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            put_f64(out, m(i, j));
}

Matrix get_matrix(std::istream& in) {
    Index rows = static_cast<Index>(get_u64(in));
    Index cols = static_cast<Index>(get_u64(in));
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = get_f64(in);
    return m;
}

}  // namespace detail

using namespace detail;

namespace {

constexpr char kMagic[8] = {'G', 'E', 'M', 'G', 'R', 'P', 'H', '\x01'};

}  // namespace

void save_graph(std::ostream& out, const GraphBundle& bundle) {
    const auto& g = bundle.graph;
    out.write(kMagic, 8);

    put_u64(out, static_cast<std::uint64_t>(g.registry.size()));
    for (const auto& name : g.registry.names())
        put_str(out, name);

    put_u64(out, static_cast<std::uint64_t>(g.n_accounts()));
    for (Index i = 0; i < g.n_accounts(); ++i)
        put_str(out, g.index.account_id(i));
    put_u64(out, static_cast<std::uint64_t>(g.index.n_devices()));
    for (Index i = 0; i < g.index.n_devices(); ++i) {
        const auto& [id, type] = g.index.device(g.n_accounts() + i);
        put_str(out, id);
        put_u64(out, static_cast<std::uint64_t>(type));
    }

    // store each undirected edge once (account, device)
    for (int d = 0; d < g.registry.size(); ++d) {
        put_u64(out, static_cast<std::uint64_t>(g.edge_count(d)));
        for (Index k = 0; k < g.adj[d].outerSize(); ++k)
            for (SpMatrix::InnerIterator it(g.adj[d], k); it; ++it)
                if (it.row() < it.col()) {
                    put_u64(out, static_cast<std::uint64_t>(it.row()));
                    put_u64(out, static_cast<std::uint64_t>(it.col()));
                }
    }

    put_i64(out, bundle.window.start);
    put_i64(out, bundle.window.end);
    put_i64(out, bundle.window.slot_width);
    put_matrix(out, bundle.features);
}

GraphBundle load_graph(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ParseError("not a graph file (bad magic or version)");

    GraphBundle bundle;
    auto n_types = get_u64(in);
    std::vector<std::string> names;
    names.reserve(n_types);
    for (std::uint64_t i = 0; i < n_types; ++i)
        names.push_back(get_str(in));
    bundle.graph.registry = DeviceTypeRegistry(std::move(names));

    auto n_accounts = get_u64(in);
    std::vector<std::string> accounts;
    accounts.reserve(n_accounts);
    for (std::uint64_t i = 0; i < n_accounts; ++i)
        accounts.push_back(get_str(in));
    auto n_devices = get_u64(in);
    std::vector<std::pair<std::string, int>> devices;
    devices.reserve(n_devices);
    for (std::uint64_t i = 0; i < n_devices; ++i) {
        std::string id = get_str(in);
        int type = static_cast<int>(get_u64(in));
        devices.emplace_back(std::move(id), type);
    }
    bundle.graph.index = VertexIndex(std::move(accounts), std::move(devices));

    Index n = bundle.graph.n_vertices();
    bundle.graph.adj.resize(n_types);
    for (std::uint64_t d = 0; d < n_types; ++d) {
        auto m = get_u64(in);
        std::vector<Eigen::Triplet<Scalar>> trips;
        trips.reserve(m * 2);
        for (std::uint64_t e = 0; e < m; ++e) {
            Index a = static_cast<Index>(get_u64(in));
            Index v = static_cast<Index>(get_u64(in));
            trips.emplace_back(a, v, 1.0);
            trips.emplace_back(v, a, 1.0);
        }
        bundle.graph.adj[d].resize(n, n);
        bundle.graph.adj[d].setFromTriplets(trips.begin(), trips.end());
    }

    bundle.window.start = get_i64(in);
    bundle.window.end = get_i64(in);
    bundle.window.slot_width = get_i64(in);
    bundle.features = get_matrix(in);
    if (bundle.features.rows() != n)
        throw ParseError("graph file feature row count mismatch");
    return bundle;
}

void save_graph_file(const std::string& path, const GraphBundle& bundle) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot open for writing: " + path);
    save_graph(out, bundle);
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

GraphBundle load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open: " + path);
    return load_graph(in);
}

}  // namespace gem
