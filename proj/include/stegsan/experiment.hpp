#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "stegsan/audio_lsb.hpp"
#include "stegsan/config.hpp"
#include "stegsan/denoiser.hpp"
#include "stegsan/hider.hpp"
#include "stegsan/lsb.hpp"
#include "stegsan/metrics.hpp"
#include "stegsan/nn/serialize.hpp"
#include "stegsan/png_io.hpp"
#include "stegsan/report.hpp"
#include "stegsan/sanitize.hpp"
#include "stegsan/synth.hpp"
#include "stegsan/vae.hpp"

namespace stegsan {

struct ExperimentConfig {
    // data
    std::string dataset = "synthetic";  // or a directory of 8-bit PNGs
    int channels = 3, height = 16, width = 16;
    int n_train = 2000;
    int n_containers = 100;
    std::vector<std::string> hide_methods = {"lsb", "ddh"};
    std::vector<std::string> sanitizers = {"gaussian", "dct_noise", "vae", "dm_suds"};
    int lsb_bits = 4;

    // diffusion sanitizer
    int T = 200;
    int t_rq1 = 0;  // 0 means T/2
    int t_grid_points = 40;
    double gaussian_sigma = 20.0;
    double dct_sigma = 20.0;
    double theta_ip = 0.95;
    double theta_se = 0.30;

    // training budgets
    int epochs_diffusion = 16;
    int epochs_vae = 12;
    int epochs_hider = 24;
    int batch = 32;
    double lr_diffusion = 2e-3;
    double lr_vae = 1e-3;
    double lr_hider = 1e-3;
    int denoiser_base = 16;
    int vae_latent = 64;
    int hider_base = 24;

    // audio case
    int n_clips = 50;
    int audio_train_clips = 150;
    int clip_frames = 2;
    int frame_len = 4096;
    int sample_rate = 16000;
    int audio_bits = 1;
    int audio_T = 200;
    int epochs_audio = 12;
    double lr_audio = 2e-3;
    int audio_base = 12;

    // bookkeeping
    std::uint64_t seed = 7;
    std::string model_dir;  // default <out>/models
    bool train_if_missing = false;
    bool real_timing = false;  // real wall time breaks byte-determinism of the CSV

    int rq1_t() const { return t_rq1 > 0 ? t_rq1 : T / 2; }

    static ExperimentConfig load(const std::string& path) {
        KvConfig kv = KvConfig::parse_file(path);
        return from_kv(kv);
    }

    static ExperimentConfig from_kv(const KvConfig& kv) {
        static const std::set<std::string> kAllowed = {
            "dataset",        "channels",       "height",          "width",
            "n_train",        "n_containers",   "hide",            "sanitizers",
            "lsb_bits",       "T",              "t",               "t_grid_points",
            "gaussian_sigma", "dct_sigma",      "theta_ip",        "theta_se",
            "epochs_diffusion", "epochs_vae",   "epochs_hider",    "batch",
            "lr_diffusion",   "lr_vae",         "lr_hider",        "denoiser_base",
            "vae_latent",     "hider_base",     "n_clips",         "audio_train_clips",
            "clip_frames",    "frame_len",      "sample_rate",     "audio_bits",
            "audio_T",        "epochs_audio",   "lr_audio",        "audio_base",
            "seed",           "model_dir",      "train",           "timing",
        };
        kv.reject_unknown_keys(kAllowed);

        ExperimentConfig c;
        c.dataset = kv.get("dataset", c.dataset);
        c.channels = static_cast<int>(kv.get_int("channels", c.channels));
        c.height = static_cast<int>(kv.get_int("height", c.height));
        c.width = static_cast<int>(kv.get_int("width", c.width));
        c.n_train = static_cast<int>(kv.get_int("n_train", c.n_train));
        c.n_containers = static_cast<int>(kv.get_int("n_containers", c.n_containers));
        c.hide_methods = kv.get_list("hide", c.hide_methods);
        c.sanitizers = kv.get_list("sanitizers", c.sanitizers);
        c.lsb_bits = static_cast<int>(kv.get_int("lsb_bits", c.lsb_bits));
        c.T = static_cast<int>(kv.get_int("T", c.T));
        c.t_rq1 = static_cast<int>(kv.get_int("t", c.t_rq1));
        c.t_grid_points = static_cast<int>(kv.get_int("t_grid_points", c.t_grid_points));
        c.gaussian_sigma = kv.get_double("gaussian_sigma", c.gaussian_sigma);
        c.dct_sigma = kv.get_double("dct_sigma", c.dct_sigma);
        c.theta_ip = kv.get_double("theta_ip", c.theta_ip);
        c.theta_se = kv.get_double("theta_se", c.theta_se);
        c.epochs_diffusion = static_cast<int>(kv.get_int("epochs_diffusion", c.epochs_diffusion));
        c.epochs_vae = static_cast<int>(kv.get_int("epochs_vae", c.epochs_vae));
        c.epochs_hider = static_cast<int>(kv.get_int("epochs_hider", c.epochs_hider));
        c.batch = static_cast<int>(kv.get_int("batch", c.batch));
        c.lr_diffusion = kv.get_double("lr_diffusion", c.lr_diffusion);
        c.lr_vae = kv.get_double("lr_vae", c.lr_vae);
        c.lr_hider = kv.get_double("lr_hider", c.lr_hider);
        c.denoiser_base = static_cast<int>(kv.get_int("denoiser_base", c.denoiser_base));
        c.vae_latent = static_cast<int>(kv.get_int("vae_latent", c.vae_latent));
        c.hider_base = static_cast<int>(kv.get_int("hider_base", c.hider_base));
        c.n_clips = static_cast<int>(kv.get_int("n_clips", c.n_clips));
        c.audio_train_clips = static_cast<int>(kv.get_int("audio_train_clips", c.audio_train_clips));
        c.clip_frames = static_cast<int>(kv.get_int("clip_frames", c.clip_frames));
        c.frame_len = static_cast<int>(kv.get_int("frame_len", c.frame_len));
        c.sample_rate = static_cast<int>(kv.get_int("sample_rate", c.sample_rate));
        c.audio_bits = static_cast<int>(kv.get_int("audio_bits", c.audio_bits));
        c.audio_T = static_cast<int>(kv.get_int("audio_T", c.audio_T));
        c.epochs_audio = static_cast<int>(kv.get_int("epochs_audio", c.epochs_audio));
        c.lr_audio = kv.get_double("lr_audio", c.lr_audio);
        c.audio_base = static_cast<int>(kv.get_int("audio_base", c.audio_base));
        c.seed = kv.get_u64("seed", c.seed);
        c.model_dir = kv.get("model_dir", c.model_dir);
        c.train_if_missing = kv.get_bool("train", c.train_if_missing);
        std::string timing = kv.get("timing", "zero");
        if (timing == "real")
            c.real_timing = true;
        else if (timing == "zero")
            c.real_timing = false;
        else
            throw std::runtime_error("config: timing must be 'zero' or 'real'");

        // environment override
        if (const char* env = std::getenv("STEGSAN_SEED"); env && *env)
            c.seed = std::strtoull(env, nullptr, 10);

        if (c.n_train <= 0 || c.n_containers <= 0 || c.T < 1 || c.t_grid_points < 1)
            throw std::runtime_error("config: counts must be positive");
        if (c.t_rq1 < 0 || c.t_rq1 > c.T) throw std::runtime_error("config: t outside [1,T]");
        return c;
    }
};

// ---------------------------------------------------------------------------
// Data handling
// ---------------------------------------------------------------------------

inline std::vector<ImageTensor> load_images_from_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            names.push_back(e.path().string());
    std::sort(names.begin(), names.end());
    std::vector<ImageTensor> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(load_png(n));
    return out;
}

struct ImageDataset {
    std::vector<ImageTensor> train;
    std::vector<ImageTensor> covers;
    std::vector<ImageTensor> secrets;
};

inline ImageDataset prepare_images(const ExperimentConfig& cfg) {
    const int need = cfg.n_train + 2 * cfg.n_containers;
    std::vector<ImageTensor> all;
    if (cfg.dataset == "synthetic") {
        all = gen_synthetic_images(need, cfg.channels, cfg.height, cfg.width,
                                   SeededRng(cfg.seed).split(1).seed());
    } else {
        all = load_images_from_dir(cfg.dataset);
        if (static_cast<int>(all.size()) < need)
            throw std::runtime_error("dataset: need " + std::to_string(need) + " PNGs, found " +
                                     std::to_string(all.size()));
        for (const auto& img : all)
            if (!img.same_shape(all.front()))
                throw std::runtime_error("dataset: images differ in shape");
        all.resize(need);
    }
    ImageDataset ds;
    ds.train.assign(all.begin(), all.begin() + cfg.n_train);
    ds.covers.assign(all.begin() + cfg.n_train, all.begin() + cfg.n_train + cfg.n_containers);
    ds.secrets.assign(all.begin() + cfg.n_train + cfg.n_containers, all.begin() + need);
    return ds;
}

// ---------------------------------------------------------------------------
// Model artifacts: loaded from model_dir if present, trained and saved when
// --train is given, otherwise an error.
// ---------------------------------------------------------------------------

struct ImageModels {
    NoiseSchedule sched;
    Denoiser2d denoiser;
    VaeModel vae;
    HidePair hider;
    bool trained_now = false;
};

inline std::string model_dir_of(const ExperimentConfig& cfg, const std::string& outdir) {
    if (!cfg.model_dir.empty()) return cfg.model_dir;
    return (std::filesystem::path(outdir) / "models").string();
}

inline ImageModels ensure_image_models(const ExperimentConfig& cfg,
                                       const std::vector<ImageTensor>& train_images,
                                       const std::string& outdir) {
    namespace fs = std::filesystem;
    const std::string dir = model_dir_of(cfg, outdir);
    const std::string diff_path = (fs::path(dir) / "diffusion.bin").string();
    const std::string vae_path = (fs::path(dir) / "vae.bin").string();
    const std::string hider_path = (fs::path(dir) / "hider.bin").string();

    ImageModels m{cosine_schedule(cfg.T),
                  Denoiser2d(cfg.channels, cfg.height, cfg.width, cfg.denoiser_base),
                  VaeModel(cfg.channels, cfg.height, cfg.width, cfg.vae_latent),
                  HidePair(cfg.channels, cfg.height, cfg.width, cfg.hider_base)};

    const bool have_all =
        fs::exists(diff_path) && fs::exists(vae_path) && fs::exists(hider_path);
    if (have_all) {
        load_model(diff_path, 1, m.denoiser.params());
        load_model(vae_path, 3, m.vae.params());
        load_model(hider_path, 4, m.hider.params());
        return m;
    }
    if (!cfg.train_if_missing)
        throw std::runtime_error("missing model artifacts in " + dir +
                                 " (run with --train to build them)");

    std::vector<FloatImage> train;
    train.reserve(train_images.size());
    for (const auto& img : train_images) train.push_back(to_model_range(img));

    SeededRng root(cfg.seed);
    DiffTrainConfig dcfg;
    dcfg.epochs = cfg.epochs_diffusion;
    dcfg.batch = cfg.batch;
    dcfg.lr = cfg.lr_diffusion;
    dcfg.seed = root.split(2).seed();
    TrainedDenoiser td = train_denoiser(train, m.sched, dcfg, cfg.denoiser_base);
    m.denoiser = std::move(td.model);

    VaeTrainConfig vcfg;
    vcfg.epochs = cfg.epochs_vae;
    vcfg.batch = cfg.batch;
    vcfg.lr = cfg.lr_vae;
    vcfg.latent = cfg.vae_latent;
    vcfg.seed = root.split(3).seed();
    TrainedVae tv = train_vae(train, vcfg);
    m.vae = std::move(tv.model);

    HideTrainConfig hcfg;
    hcfg.epochs = cfg.epochs_hider;
    hcfg.batch = cfg.batch;
    hcfg.lr = cfg.lr_hider;
    hcfg.seed = root.split(4).seed();
    TrainedHidePair th = train_hide_pair(train, hcfg, cfg.hider_base);
    m.hider = std::move(th.pair);
    m.trained_now = true;

    fs::create_directories(dir);
    nn::ModelMeta meta;
    meta.seed = cfg.seed;
    meta.channels = cfg.channels;
    meta.height = cfg.height;
    meta.width = cfg.width;
    meta.kind = 1;
    meta.horizon = cfg.T;
    meta.schedule_kind = 1;
    meta.hyper1 = cfg.denoiser_base;
    save_model(diff_path, meta, m.denoiser.params());
    meta.kind = 3;
    meta.horizon = 0;
    meta.schedule_kind = 0;
    meta.hyper1 = cfg.vae_latent;
    meta.hyper2 = 16;
    save_model(vae_path, meta, m.vae.params());
    meta.kind = 4;
    meta.hyper1 = cfg.hider_base;
    meta.hyper2 = 0;
    save_model(hider_path, meta, m.hider.params());
    return m;
}

inline AudioDenoiser ensure_audio_model(const ExperimentConfig& cfg, const std::string& outdir,
                                        const NoiseSchedule& sched) {
    namespace fs = std::filesystem;
    const std::string dir = model_dir_of(cfg, outdir);
    const std::string path = (fs::path(dir) / "audio_diffusion.bin").string();
    AudioDenoiser model(cfg.frame_len, cfg.audio_base, cfg.audio_T);
    if (fs::exists(path)) {
        load_model(path, 2, model.params());
        return model;
    }
    if (!cfg.train_if_missing)
        throw std::runtime_error("missing model artifacts in " + dir +
                                 " (run with --train to build them)");

    SeededRng root(cfg.seed);
    auto clips = gen_synthetic_clips(cfg.audio_train_clips, cfg.clip_frames, cfg.frame_len,
                                     cfg.sample_rate, root.split(9).seed());
    std::vector<std::vector<double>> frames;
    for (const auto& clip : clips) {
        std::vector<double> unit = audio_to_unit(clip);
        for (std::size_t start = 0; start + cfg.frame_len <= unit.size();
             start += cfg.frame_len)
            frames.emplace_back(unit.begin() + start, unit.begin() + start + cfg.frame_len);
    }
    DiffTrainConfig dcfg;
    dcfg.epochs = cfg.epochs_audio;
    dcfg.batch = cfg.batch;
    dcfg.lr = cfg.lr_audio;
    dcfg.seed = root.split(10).seed();
    TrainedAudioDenoiser ta = train_audio_denoiser(frames, sched, dcfg, cfg.frame_len,
                                                   cfg.audio_base);
    model = std::move(ta.model);

    fs::create_directories(dir);
    nn::ModelMeta meta;
    meta.kind = 2;
    meta.seed = cfg.seed;
    meta.horizon = cfg.audio_T;
    meta.schedule_kind = 1;
    meta.channels = 1;
    meta.height = 1;
    meta.width = cfg.frame_len;
    meta.hyper1 = cfg.audio_base;
    save_model(path, meta, model.params());
    return model;
}

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

namespace detail {

struct MetricAccum {
    double mse_ip = 0, psnr_ip = 0, ssim_ip = 0, ncc_ip = 0;
    double mse_se = 0, psnr_se = 0, ssim_se = 0, ncc_se = 0;
    int n = 0, ncc_ip_n = 0, ncc_se_n = 0;

    void add(const MetricReport& r) {
        mse_ip += r.mse_ip;
        psnr_ip += r.psnr_ip;
        ssim_ip += r.ssim_ip;
        mse_se += r.mse_se;
        psnr_se += r.psnr_se;
        ssim_se += r.ssim_se;
        if (!std::isnan(r.ncc_ip)) {
            ncc_ip += r.ncc_ip;
            ++ncc_ip_n;
        }
        if (!std::isnan(r.ncc_se)) {
            ncc_se += r.ncc_se;
            ++ncc_se_n;
        }
        ++n;
    }

    MetricReport mean() const {
        MetricReport r;
        r.mse_ip = mse_ip / n;
        r.psnr_ip = psnr_ip / n;
        r.ssim_ip = ssim_ip / n;
        r.mse_se = mse_se / n;
        r.psnr_se = psnr_se / n;
        r.ssim_se = ssim_se / n;
        r.ncc_ip = ncc_ip_n ? ncc_ip / ncc_ip_n : std::numeric_limits<double>::quiet_NaN();
        r.ncc_se = ncc_se_n ? ncc_se / ncc_se_n : std::numeric_limits<double>::quiet_NaN();
        return r;
    }
};

inline std::string verdict_str(bool ok) { return ok ? "success" : "fail"; }

}  // namespace detail

struct HideMethodFns {
    std::string name;
    std::function<ImageTensor(const ImageTensor&, const ImageTensor&)> hide;
    std::function<ImageTensor(const ImageTensor&)> reveal;
};

inline std::vector<HideMethodFns> make_hide_methods(const ExperimentConfig& cfg,
                                                    ImageModels& models) {
    std::vector<HideMethodFns> out;
    for (const std::string& name : cfg.hide_methods) {
        if (name == "lsb") {
            int bits = cfg.lsb_bits;
            out.push_back({"lsb",
                           [bits](const ImageTensor& c, const ImageTensor& s) {
                               return lsb_hide(c, s, bits);
                           },
                           [bits](const ImageTensor& x) { return lsb_reveal(x, bits); }});
        } else if (name == "ddh") {
            HidePair* pair = &models.hider;
            out.push_back({"ddh",
                           [pair](const ImageTensor& c, const ImageTensor& s) {
                               return ddh_hide(*pair, c, s);
                           },
                           [pair](const ImageTensor& x) { return ddh_reveal(*pair, x); }});
        } else {
            throw std::runtime_error("unknown hide method '" + name + "'");
        }
    }
    return out;
}

struct SanitizerFns {
    std::string name;
    bool uses_t = false;
    std::function<ImageTensor(const ImageTensor&, int, SeededRng&)> run;
};

inline std::vector<SanitizerFns> make_sanitizers(const ExperimentConfig& cfg,
                                                 ImageModels& models) {
    std::vector<SanitizerFns> out;
    for (const std::string& name : cfg.sanitizers) {
        if (name == "gaussian") {
            double sigma = cfg.gaussian_sigma;
            out.push_back({"gaussian", false,
                           [sigma](const ImageTensor& x, int, SeededRng& rng) {
                               return gaussian_sanitize(x, sigma, rng);
                           }});
        } else if (name == "dct_noise") {
            double sigma = cfg.dct_sigma;
            out.push_back({"dct_noise", false,
                           [sigma](const ImageTensor& x, int, SeededRng& rng) {
                               return dct_noise_sanitize(x, sigma, rng);
                           }});
        } else if (name == "vae") {
            VaeModel* vae = &models.vae;
            out.push_back({"vae", false, [vae](const ImageTensor& x, int, SeededRng&) {
                               return vae_sanitize(x, *vae);
                           }});
        } else if (name == "dm_suds") {
            Denoiser2d* den = &models.denoiser;
            const NoiseSchedule* sched = &models.sched;
            out.push_back({"dm_suds", true,
                           [den, sched](const ImageTensor& x, int t, SeededRng& rng) {
                               return dm_suds(x, t, predictor_of(*den), *sched, rng);
                           }});
        } else if (name == "dm_suds_direct") {
            Denoiser2d* den = &models.denoiser;
            const NoiseSchedule* sched = &models.sched;
            out.push_back({"dm_suds_direct", true,
                           [den, sched](const ImageTensor& x, int t, SeededRng&) {
                               return dm_suds_direct(x, t, predictor_of(*den), *sched);
                           }});
        } else {
            throw std::runtime_error("unknown sanitizer '" + name + "'");
        }
    }
    return out;
}

struct ContainerSet {
    std::string hide_name;
    std::vector<ImageTensor> containers;
    std::vector<ImageTensor> pre_reveals;
};

inline std::vector<ContainerSet> build_containers(const ImageDataset& ds,
                                                  std::vector<HideMethodFns>& methods) {
    std::vector<ContainerSet> out;
    for (auto& m : methods) {
        ContainerSet set;
        set.hide_name = m.name;
        for (std::size_t i = 0; i < ds.covers.size(); ++i) {
            ImageTensor c = m.hide(ds.covers[i], ds.secrets[i]);
            set.pre_reveals.push_back(m.reveal(c));
            set.containers.push_back(std::move(c));
        }
        out.push_back(std::move(set));
    }
    return out;
}

// One aggregate row per (hide, sanitizer) plus the baseline None row.
inline std::vector<ResultRow> run_rq1(const ExperimentConfig& cfg, const std::string& outdir) {
    ImageDataset ds = prepare_images(cfg);
    ImageModels models = ensure_image_models(cfg, ds.train, outdir);
    auto hide_methods = make_hide_methods(cfg, models);
    auto sanitizers = make_sanitizers(cfg, models);
    auto container_sets = build_containers(ds, hide_methods);
    SeededRng root = SeededRng(cfg.seed).split(6);

    std::vector<ResultRow> rows;
    for (std::size_t h = 0; h < hide_methods.size(); ++h) {
        auto& method = hide_methods[h];
        auto& set = container_sets[h];

        // None row: covers vs containers, secrets vs pre-sanitization reveals
        detail::MetricAccum none;
        for (std::size_t i = 0; i < set.containers.size(); ++i)
            none.add(metric_report(ds.covers[i], set.containers[i], ds.secrets[i],
                                   set.pre_reveals[i]));
        ResultRow none_row;
        none_row.hide = method.name;
        none_row.sanitizer = "none";
        none_row.t = 0;
        none_row.metrics = none.mean();
        rows.push_back(none_row);

        for (std::size_t s = 0; s < sanitizers.size(); ++s) {
            auto& san = sanitizers[s];
            SeededRng rng = root.split(h * 100 + s);
            const int t = san.uses_t ? cfg.rq1_t() : 0;
            detail::MetricAccum acc;
            double total_ms = 0.0;
            for (std::size_t i = 0; i < set.containers.size(); ++i) {
                auto t0 = std::chrono::steady_clock::now();
                ImageTensor sanitized = san.run(set.containers[i], t, rng);
                auto t1 = std::chrono::steady_clock::now();
                total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
                ImageTensor revealed = method.reveal(sanitized);
                acc.add(metric_report(ds.covers[i], sanitized, ds.secrets[i], revealed));
            }
            ResultRow row;
            row.hide = method.name;
            row.sanitizer = san.name;
            row.t = t;
            row.metrics = acc.mean();
            Verdict v = verdict(row.metrics.ncc_ip, row.metrics.ncc_se, cfg.theta_ip, cfg.theta_se);
            row.verdict_ip = detail::verdict_str(v.ip_success);
            row.verdict_se = detail::verdict_str(v.se_success);
            row.time_ms = cfg.real_timing ? total_ms / set.containers.size() : 0.0;
            rows.push_back(std::move(row));
        }
    }
    write_text_file((std::filesystem::path(outdir) / "rq1_results.csv").string(),
                    result_csv(rows));
    return rows;
}

inline std::vector<int> t_grid(const ExperimentConfig& cfg) {
    int step = std::max(1, cfg.T / cfg.t_grid_points);
    std::vector<int> grid;
    for (int t = step; t <= cfg.T; t += step) grid.push_back(t);
    return grid;
}

namespace detail {

inline std::vector<ResultRow> run_t_sweep(const ExperimentConfig& cfg, const std::string& outdir,
                                          const std::vector<std::string>& modes,
                                          const std::string& csv_name,
                                          const std::string& svg_name,
                                          const std::string& title) {
    ImageDataset ds = prepare_images(cfg);
    ImageModels models = ensure_image_models(cfg, ds.train, outdir);
    auto hide_methods = make_hide_methods(cfg, models);
    auto container_sets = build_containers(ds, hide_methods);
    auto grid = t_grid(cfg);
    SeededRng root = SeededRng(cfg.seed).split(7);

    std::vector<ResultRow> rows;
    std::vector<PlotSeries> series;
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
    int color_idx = 0;

    for (std::size_t h = 0; h < hide_methods.size(); ++h) {
        auto& method = hide_methods[h];
        auto& set = container_sets[h];
        for (const std::string& mode : modes) {
            PlotSeries ip_series{method.name + " " + mode + " IP",
                                 kColors[color_idx % 8], {}, {}};
            PlotSeries se_series{method.name + " " + mode + " SE",
                                 kColors[(color_idx + 1) % 8], {}, {}};
            color_idx += 2;
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                const int t = grid[gi];
                SeededRng rng = root.split((h * 8 + (mode == "dm_suds" ? 0 : 1)) * 1000 + gi);
                detail::MetricAccum acc;
                double total_ms = 0.0;
                for (std::size_t i = 0; i < set.containers.size(); ++i) {
                    auto t0 = std::chrono::steady_clock::now();
                    ImageTensor sanitized =
                        mode == "dm_suds"
                            ? dm_suds(set.containers[i], t, predictor_of(models.denoiser),
                                      models.sched, rng)
                            : dm_suds_direct(set.containers[i], t, predictor_of(models.denoiser),
                                             models.sched);
                    auto t1 = std::chrono::steady_clock::now();
                    total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
                    ImageTensor revealed = method.reveal(sanitized);
                    acc.add(metric_report(ds.covers[i], sanitized, ds.secrets[i], revealed));
                }
                ResultRow row;
                row.hide = method.name;
                row.sanitizer = mode;
                row.t = t;
                row.metrics = acc.mean();
                Verdict v =
                    verdict(row.metrics.ncc_ip, row.metrics.ncc_se, cfg.theta_ip, cfg.theta_se);
                row.verdict_ip = detail::verdict_str(v.ip_success);
                row.verdict_se = detail::verdict_str(v.se_success);
                row.time_ms = cfg.real_timing ? total_ms / set.containers.size() : 0.0;
                ip_series.x.push_back(t);
                ip_series.y.push_back(row.metrics.ncc_ip);
                se_series.x.push_back(t);
                se_series.y.push_back(row.metrics.ncc_se);
                rows.push_back(std::move(row));
            }
            series.push_back(std::move(ip_series));
            series.push_back(std::move(se_series));
        }
    }
    write_text_file((std::filesystem::path(outdir) / csv_name).string(), result_csv(rows));
    write_text_file((std::filesystem::path(outdir) / svg_name).string(),
                    svg_line_plot(series, title, "timestep t", "NCC"));
    return rows;
}

}  // namespace detail

// Timestep sweep with forward noise (trend study).
inline std::vector<ResultRow> run_rq2(const ExperimentConfig& cfg, const std::string& outdir) {
    return detail::run_t_sweep(cfg, outdir, {"dm_suds"}, "rq2_results.csv", "rq2_ncc_vs_t.svg",
                               "IP and SE NCC vs timestep (with forward noise)");
}

// Same sweep without added noise, paired with the noisy mode per t.
inline std::vector<ResultRow> run_rq3(const ExperimentConfig& cfg, const std::string& outdir) {
    return detail::run_t_sweep(cfg, outdir, {"dm_suds", "dm_suds_direct"}, "rq3_results.csv",
                               "rq3_ncc_vs_t.svg",
                               "Direct denoising vs forward-noised sanitization");
}

// ---------------------------------------------------------------------------
// Audio case study
// ---------------------------------------------------------------------------

struct AudioCaseRow {
    int clip = 0;
    std::size_t payload_bits = 0;
    double pre_ber = 0.0;
    double mse_norm = 0.0;
    double post_ber = 0.0;
    double rr_value = 0.0;
};

struct AudioCaseResult {
    std::vector<AudioCaseRow> rows;
    double mean_pre_ber = 0.0;
    double mean_mse = 0.0;
    double mean_post_ber = 0.0;
    double mean_rr = 0.0;  // per-file RR averaged afterwards
};

inline std::string audio_csv(const AudioCaseResult& res) {
    std::ostringstream out;
    out << "clip,hide,payload_bits,pre_ber,mse_norm,post_ber,rr\n";
    for (const auto& r : res.rows)
        out << r.clip << ",lsb," << r.payload_bits << ',' << format_double(r.pre_ber) << ','
            << format_double(r.mse_norm) << ',' << format_double(r.post_ber) << ','
            << format_double(r.rr_value) << "\n";
    out << "mean,lsb,," << format_double(res.mean_pre_ber) << ',' << format_double(res.mean_mse)
        << ',' << format_double(res.mean_post_ber) << ',' << format_double(res.mean_rr) << "\n";
    return out.str();
}

inline AudioCaseResult run_audio_case(const ExperimentConfig& cfg, const std::string& outdir) {
    NoiseSchedule sched = cosine_schedule(cfg.audio_T);
    AudioDenoiser model = ensure_audio_model(cfg, outdir, sched);
    SeededRng root(cfg.seed);
    auto clips = gen_synthetic_clips(cfg.n_clips, cfg.clip_frames, cfg.frame_len, cfg.sample_rate,
                                     root.split(11).seed());
    SeededRng san_rng = root.split(12);
    const int t = cfg.audio_T / 2;

    AudioCaseResult res;
    for (int i = 0; i < static_cast<int>(clips.size()); ++i) {
        TextPayload payload = TextPayload::from_text(synthetic_sentence(i));
        std::vector<std::uint8_t> embedded = payload.framed_bits();
        std::size_t capacity = clips[i].samples.size() * static_cast<std::size_t>(cfg.audio_bits);
        if (embedded.size() > capacity) {
            std::cerr << "audio case: clip " << i << " capacity exceeded, skipped\n";
            continue;
        }
        AudioClip container = audio_lsb_hide(clips[i], payload, cfg.audio_bits);
        auto pre_bits = audio_lsb_extract_bits(container, cfg.audio_bits, 0, embedded.size());
        double pre = ber(embedded, pre_bits);

        AudioClip sanitized = dm_suds(container, t, predictor_of(model), sched, san_rng,
                                      cfg.frame_len);
        auto post_bits = audio_lsb_extract_bits(sanitized, cfg.audio_bits, 0, embedded.size());
        double post = ber(embedded, post_bits);

        std::vector<double> a = audio_to_unit(container), b = audio_to_unit(sanitized);
        double m = 0.0;
        for (std::size_t q = 0; q < a.size(); ++q) m += (a[q] - b[q]) * (a[q] - b[q]);
        m /= static_cast<double>(a.size());

        AudioCaseRow row;
        row.clip = i;
        row.payload_bits = payload.bit_length();
        row.pre_ber = pre;
        row.mse_norm = m;
        row.post_ber = post;
        row.rr_value = rr(post);
        res.rows.push_back(row);
    }
    if (res.rows.empty()) throw std::runtime_error("audio case: no clips processed");
    for (const auto& r : res.rows) {
        res.mean_pre_ber += r.pre_ber;
        res.mean_mse += r.mse_norm;
        res.mean_post_ber += r.post_ber;
        res.mean_rr += r.rr_value;
    }
    const double n = static_cast<double>(res.rows.size());
    res.mean_pre_ber /= n;
    res.mean_mse /= n;
    res.mean_post_ber /= n;
    res.mean_rr /= n;
    write_text_file((std::filesystem::path(outdir) / "audio_results.csv").string(),
                    audio_csv(res));
    return res;
}

// ---------------------------------------------------------------------------
// Trend statistics
// ---------------------------------------------------------------------------

// Spearman rank correlation with average ranks for ties.
inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman_rho: need two equal-length sequences");
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t q = i; q <= j; ++q) r[idx[q]] = avg;
            i = j + 1;
        }
        return r;
    };
    std::vector<double> rx = ranks(x), ry = ranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= rx.size();
    my /= ry.size();
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

}  // namespace stegsan
