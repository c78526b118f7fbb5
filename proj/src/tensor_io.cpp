#include "lsteer/tensor_io.hpp"

#include <cmath>

#include "lsteer/util.hpp"

namespace lsteer {

static constexpr char kMagic[4] = {'L', 'S', 'T', 'N'};

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
    ensure_finite(t, "save_tensor");
    if (t.rank() > 255) throw Error("save_tensor: rank exceeds format limit");
    std::string out;
    out.reserve(6 + 4 * t.rank() + 4 * t.size());
    out.append(kMagic, 4);
    out.push_back('\x01');
    out.push_back(static_cast<char>(t.rank()));
    for (auto e : t.shape) put_u32_le(out, e);
    for (float v : t.data) put_f32_le(out, v);
    atomic_write_file(path, out);
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::string in = read_file(path);
    if (in.size() < 6 || in.compare(0, 4, kMagic, 4) != 0)
        throw Error("load_tensor: bad magic in " + path.string());
    if (in[4] != '\x01')
        throw Error("load_tensor: unsupported version in " + path.string());
    std::size_t rank = static_cast<unsigned char>(in[5]);
    std::size_t off = 6;
    std::vector<std::uint32_t> shape(rank);
    for (auto& e : shape) {
        e = get_u32_le(in, off);
        off += 4;
    }
    std::size_t n = shape_numel(shape);
    if (in.size() != off + 4 * n)
        throw Error("load_tensor: payload length mismatch in " + path.string());
    std::vector<float> data(n);
    for (auto& v : data) {
        v = get_f32_le(in, off);
        off += 4;
    }
    Tensor t(std::move(shape), std::move(data));
    ensure_finite(t, "load_tensor");
    return t;
}

}  // namespace lsteer
