#include "core/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wig {

namespace {

constexpr char kMagic[8] = {'W', 'I', 'G', 'C', 'K', 'P', 'T', '\0'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kTagModel = 1;
constexpr uint32_t kTagTrainer = 2;

struct Writer {
    std::ostringstream os;

    void raw(const void* p, std::size_t n) {
        os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    void u8(uint8_t v) { raw(&v, 1); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void i64(int64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void vec(const VectorXd& v) {
        u64(static_cast<uint64_t>(v.size()));
        raw(v.data(), static_cast<std::size_t>(v.size()) * 8);
    }
    void mat_rowmajor(const MatrixXd& m) {
        u32(static_cast<uint32_t>(m.rows()));
        u32(static_cast<uint32_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
    std::string take() { return os.str(); }
};

struct Reader {
    const char* p;
    const char* end;

    void raw(void* out, std::size_t n) {
        if (p + n > end)
            throw IoError("checkpoint: truncated file");
        std::memcpy(out, p, n);
        p += n;
    }
    uint8_t u8() { uint8_t v; raw(&v, 1); return v; }
    uint32_t u32() { uint32_t v; raw(&v, 4); return v; }
    uint64_t u64() { uint64_t v; raw(&v, 8); return v; }
    int64_t i64() { int64_t v; raw(&v, 8); return v; }
    double f64() { double v; raw(&v, 8); return v; }
    std::string str() {
        const uint32_t n = u32();
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    VectorXd vec() {
        const uint64_t n = u64();
        VectorXd v(static_cast<Eigen::Index>(n));
        raw(v.data(), n * 8);
        return v;
    }
    MatrixXd mat_rowmajor() {
        const uint32_t rows = u32();
        const uint32_t cols = u32();
        MatrixXd m(rows, cols);
        for (uint32_t i = 0; i < rows; ++i)
            for (uint32_t j = 0; j < cols; ++j) m(i, j) = f64();
        return m;
    }
};

void write_net(Writer& w, const NetworkParams& net) {
    w.u32(static_cast<uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        w.u32(static_cast<uint32_t>(l.act));
        w.mat_rowmajor(l.w);
        w.vec(l.b);
    }
}

NetworkParams read_net(Reader& r) {
    NetworkParams net;
    const uint32_t n = r.u32();
    net.layers.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        net.layers[i].act = static_cast<Activation>(r.u32());
        net.layers[i].w = r.mat_rowmajor();
        net.layers[i].b = r.vec();
    }
    return net;
}

void write_adam(Writer& w, const AdamState& s) {
    w.vec(s.m);
    w.vec(s.v);
    w.i64(s.step);
    w.f64(s.beta1);
    w.f64(s.beta2);
    w.f64(s.eps);
}

AdamState read_adam(Reader& r) {
    AdamState s;
    s.m = r.vec();
    s.v = r.vec();
    s.step = r.i64();
    s.beta1 = r.f64();
    s.beta2 = r.f64();
    s.eps = r.f64();
    return s;
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    Writer model;
    model.u32(static_cast<uint32_t>(ck.sp.dim));
    model.u32(static_cast<uint32_t>(ck.sp.d_base));
    model.u8(ck.sp.alpha_frozen ? 1 : 0);
    model.f64(ck.sp.alpha_raw);
    model.f64(ck.consts.hbar);
    model.f64(ck.consts.mass);
    model.f64(ck.horizon);
    write_net(model, ck.sp.net_plus);
    write_net(model, ck.sp.net_minus);
    model.str(ck.decomp_name);
    model.u32(static_cast<uint32_t>(ck.decomp_params.size()));
    for (const auto& [key, value] : ck.decomp_params) {
        model.str(key);
        model.f64(value);
    }

    Writer out;
    out.raw(kMagic, 8);
    out.u32(kVersion);
    out.u32(ck.trainer ? 2u : 1u);

    const std::string model_bytes = model.take();
    out.u32(kTagModel);
    out.u64(model_bytes.size());
    out.raw(model_bytes.data(), model_bytes.size());

    if (ck.trainer) {
        Writer tr;
        const TrainerStateBlob& t = *ck.trainer;
        tr.u64(t.epoch);
        write_adam(tr, t.opt_plus);
        write_adam(tr, t.opt_minus);
        write_adam(tr, t.opt_alpha);
        write_adam(tr, t.opt_eta);
        tr.u32(static_cast<uint32_t>(t.tfs.size()));
        tr.u32(static_cast<uint32_t>(t.tfs.dim()));
        for (const auto& tf : t.tfs.members) {
            tr.vec(tf.w_x);
            tr.vec(tf.w_p);
            tr.f64(tf.kappa);
            tr.f64(tf.b);
        }
        tr.u64(t.streams.seed);
        tr.u32(static_cast<uint32_t>(t.streams.pos.size()));
        for (uint64_t p : t.streams.pos) tr.u64(p);
        const std::string tr_bytes = tr.take();
        out.u32(kTagTrainer);
        out.u64(tr_bytes.size());
        out.raw(tr_bytes.data(), tr_bytes.size());
    }

    // write-temp-then-rename so readers never observe a partial file
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw IoError("cannot open '" + tmp + "' for writing");
        const std::string bytes = out.take();
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os)
            throw IoError("short write to '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open checkpoint '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(is)),
                      std::istreambuf_iterator<char>());
    Reader r{bytes.data(), bytes.data() + bytes.size()};

    char magic[8];
    r.raw(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("'" + path + "' is not a checkpoint");
    if (r.u32() != kVersion)
        throw IoError("unsupported checkpoint version");
    const uint32_t n_sections = r.u32();

    Checkpoint ck;
    bool have_model = false;
    for (uint32_t s = 0; s < n_sections; ++s) {
        const uint32_t tag = r.u32();
        const uint64_t len = r.u64();
        Reader sec{r.p, r.p + len};
        r.p += len;
        if (tag == kTagModel) {
            ck.sp.dim = static_cast<int>(sec.u32());
            ck.sp.d_base = static_cast<int>(sec.u32());
            ck.sp.alpha_frozen = sec.u8() != 0;
            ck.sp.alpha_raw = sec.f64();
            ck.consts.hbar = sec.f64();
            ck.consts.mass = sec.f64();
            ck.horizon = sec.f64();
            ck.consts.dim = ck.sp.dim;
            ck.sp.net_plus = read_net(sec);
            ck.sp.net_minus = read_net(sec);
            ck.decomp_name = sec.str();
            const uint32_t np = sec.u32();
            for (uint32_t i = 0; i < np; ++i) {
                std::string key = sec.str();
                ck.decomp_params[key] = sec.f64();
            }
            have_model = true;
        } else if (tag == kTagTrainer) {
            TrainerStateBlob t;
            t.epoch = sec.u64();
            t.opt_plus = read_adam(sec);
            t.opt_minus = read_adam(sec);
            t.opt_alpha = read_adam(sec);
            t.opt_eta = read_adam(sec);
            const uint32_t k = sec.u32();
            (void)sec.u32();  // dim, implied by the stored vectors
            t.tfs.members.resize(k);
            for (uint32_t i = 0; i < k; ++i) {
                t.tfs.members[i].w_x = sec.vec();
                t.tfs.members[i].w_p = sec.vec();
                t.tfs.members[i].kappa = sec.f64();
                t.tfs.members[i].b = sec.f64();
            }
            t.streams.seed = sec.u64();
            const uint32_t n_pos = sec.u32();
            if (n_pos != t.streams.pos.size())
                throw IoError("checkpoint: stream table size mismatch");
            for (auto& p : t.streams.pos) p = sec.u64();
            ck.trainer = std::move(t);
        }
        // unknown sections are skipped (forward compatibility)
    }
    if (!have_model)
        throw IoError("checkpoint has no model section");
    return ck;
}

} // namespace wig
