// stegsan: hide/reveal payloads, sanitize media, score the result.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <json.hpp>

#include "stegsan/audio_lsb.hpp"
#include "stegsan/experiment.hpp"
#include "stegsan/lsb.hpp"
#include "stegsan/metrics.hpp"
#include "stegsan/png_io.hpp"
#include "stegsan/sanitize.hpp"
#include "stegsan/synth.hpp"
#include "stegsan/wav_io.hpp"

namespace fs = std::filesystem;
using namespace stegsan;

namespace {

bool is_wav(const std::string& path) { return fs::path(path).extension() == ".wav"; }

NoiseSchedule schedule_from_meta(const nn::ModelMeta& meta) {
    if (meta.schedule_kind != 1 || meta.horizon < 1)
        throw std::runtime_error("model file carries no cosine schedule horizon");
    return cosine_schedule(static_cast<int>(meta.horizon));
}

Denoiser2d load_image_denoiser(const std::string& path, nn::ModelMeta& meta) {
    meta = nn::read_model_meta(path);
    if (meta.kind != 1) throw std::runtime_error("not an image denoiser weight file: " + path);
    Denoiser2d model(meta.channels, meta.height, meta.width,
                     meta.hyper1 ? static_cast<int>(meta.hyper1) : 16);
    nn::load_model(path, 1, model.params());
    return model;
}

AudioDenoiser load_audio_denoiser(const std::string& path, nn::ModelMeta& meta) {
    meta = nn::read_model_meta(path);
    if (meta.kind != 2) throw std::runtime_error("not an audio denoiser weight file: " + path);
    AudioDenoiser model(static_cast<int>(meta.width),
                        meta.hyper1 ? static_cast<int>(meta.hyper1) : 12,
                        meta.horizon ? static_cast<int>(meta.horizon) : 200);
    nn::load_model(path, 2, model.params());
    return model;
}

VaeModel load_vae(const std::string& path) {
    nn::ModelMeta meta = nn::read_model_meta(path);
    if (meta.kind != 3) throw std::runtime_error("not a vae weight file: " + path);
    VaeModel model(meta.channels, meta.height, meta.width,
                   meta.hyper1 ? static_cast<int>(meta.hyper1) : 64,
                   meta.hyper2 ? static_cast<int>(meta.hyper2) : 16);
    nn::load_model(path, 3, model.params());
    return model;
}

HidePair load_hider(const std::string& path) {
    nn::ModelMeta meta = nn::read_model_meta(path);
    if (meta.kind != 4) throw std::runtime_error("not a hide-pair weight file: " + path);
    HidePair pair(meta.channels, meta.height, meta.width,
                  meta.hyper1 ? static_cast<int>(meta.hyper1) : 24);
    nn::load_model(path, 4, pair.params());
    return pair;
}

std::vector<FloatImage> load_training_images(const std::string& dir) {
    auto imgs = load_images_from_dir(dir);
    if (imgs.empty()) throw std::runtime_error("no .png files in " + dir);
    std::vector<FloatImage> out;
    out.reserve(imgs.size());
    for (const auto& img : imgs) out.push_back(to_model_range(img));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steganography hide/reveal, blind sanitization and evaluation"};
    app.require_subcommand(1);

    // ---------------- hide ----------------
    auto* hide_cmd = app.add_subcommand("hide", "embed a secret into a cover (.png or .wav)");
    std::string hide_cover, hide_secret, hide_text, hide_out;
    int hide_bits = 4;
    hide_cmd->add_option("--cover", hide_cover, "cover file")->required();
    hide_cmd->add_option("--secret", hide_secret, "secret image (.png cover only)");
    hide_cmd->add_option("--text", hide_text, "text secret (.wav cover only)");
    hide_cmd->add_option("--bits", hide_bits, "LSB planes used");
    hide_cmd->add_option("--out", hide_out, "output container")->required();

    // ---------------- reveal ----------------
    auto* reveal_cmd = app.add_subcommand("reveal", "extract the secret from a container");
    std::string reveal_in, reveal_out;
    int reveal_bits = 4;
    reveal_cmd->add_option("--container", reveal_in, "container file")->required();
    reveal_cmd->add_option("--bits", reveal_bits, "LSB planes used");
    reveal_cmd->add_option("--out", reveal_out, "output secret image (.png containers)");

    // ---------------- train-hider ----------------
    auto* th_cmd = app.add_subcommand("train-hider", "train the dependent hide/reveal pair");
    std::string th_data, th_out = "hider.bin";
    int th_epochs = 24, th_batch = 32, th_base = 24;
    double th_lr = 1e-3, th_lc = 1.0, th_ls = 0.75;
    std::uint64_t th_seed = 1;
    th_cmd->add_option("--data", th_data, "directory of training PNGs")->required();
    th_cmd->add_option("--out", th_out, "weight file");
    th_cmd->add_option("--epochs", th_epochs);
    th_cmd->add_option("--batch", th_batch);
    th_cmd->add_option("--lr", th_lr);
    th_cmd->add_option("--base", th_base, "conv channels");
    th_cmd->add_option("--lambda-cover", th_lc);
    th_cmd->add_option("--lambda-secret", th_ls);
    th_cmd->add_option("--seed", th_seed);

    // ---------------- train-diffusion ----------------
    auto* td_cmd = app.add_subcommand("train-diffusion", "train the image noise predictor");
    std::string td_data, td_out = "diffusion.bin";
    int td_T = 200, td_epochs = 16, td_batch = 32, td_base = 16;
    double td_lr = 2e-3;
    std::uint64_t td_seed = 1;
    td_cmd->add_option("--data", td_data, "directory of training PNGs")->required();
    td_cmd->add_option("--T", td_T, "diffusion horizon");
    td_cmd->add_option("--epochs", td_epochs);
    td_cmd->add_option("--batch", td_batch);
    td_cmd->add_option("--lr", td_lr);
    td_cmd->add_option("--base", td_base, "conv channels");
    td_cmd->add_option("--seed", td_seed);
    td_cmd->add_option("--out", td_out, "weight file");

    // ---------------- train-vae ----------------
    auto* tv_cmd = app.add_subcommand("train-vae", "train the VAE baseline sanitizer");
    std::string tv_data, tv_out = "vae.bin";
    int tv_epochs = 12, tv_batch = 32, tv_latent = 64;
    double tv_lr = 1e-3;
    std::uint64_t tv_seed = 1;
    tv_cmd->add_option("--data", tv_data, "directory of training PNGs")->required();
    tv_cmd->add_option("--epochs", tv_epochs);
    tv_cmd->add_option("--batch", tv_batch);
    tv_cmd->add_option("--lr", tv_lr);
    tv_cmd->add_option("--latent", tv_latent);
    tv_cmd->add_option("--seed", tv_seed);
    tv_cmd->add_option("--out", tv_out, "weight file");

    // ---------------- train-audio-diffusion ----------------
    auto* ta_cmd = app.add_subcommand("train-audio-diffusion",
                                      "train the 1-D frame noise predictor");
    std::string ta_data, ta_out = "audio_diffusion.bin";
    int ta_T = 200, ta_epochs = 12, ta_batch = 32, ta_base = 12, ta_frame = 4096;
    int ta_clips = 150, ta_frames_per_clip = 2, ta_rate = 16000;
    double ta_lr = 2e-3;
    std::uint64_t ta_seed = 1;
    ta_cmd->add_option("--data", ta_data, "directory of training WAVs (default: synthetic)");
    ta_cmd->add_option("--clips", ta_clips, "synthetic training clips when no --data");
    ta_cmd->add_option("--frames-per-clip", ta_frames_per_clip);
    ta_cmd->add_option("--rate", ta_rate);
    ta_cmd->add_option("--T", ta_T);
    ta_cmd->add_option("--epochs", ta_epochs);
    ta_cmd->add_option("--batch", ta_batch);
    ta_cmd->add_option("--lr", ta_lr);
    ta_cmd->add_option("--base", ta_base);
    ta_cmd->add_option("--frame", ta_frame, "frame length (power of two)");
    ta_cmd->add_option("--seed", ta_seed);
    ta_cmd->add_option("--out", ta_out, "weight file");

    // ---------------- sanitize ----------------
    auto* san_cmd = app.add_subcommand("sanitize", "remove hidden payloads from media");
    std::string san_method = "dm-suds", san_model, san_in, san_out, san_x0 = "exact";
    int san_t = 0;
    double san_sigma = 20.0;
    std::uint64_t san_seed = 1;
    san_cmd->add_option("--method", san_method,
                        "dm-suds | dm-suds-direct | gaussian | dct-noise | vae");
    san_cmd->add_option("--t", san_t, "diffusion timestep (default T/2)");
    san_cmd->add_option("--model", san_model, "weight file (diffusion / vae methods)");
    san_cmd->add_option("--sigma", san_sigma, "noise scale (gaussian / dct-noise)");
    san_cmd->add_option("--x0-mode", san_x0, "exact | paper (one-step form)");
    san_cmd->add_option("--seed", san_seed);
    san_cmd->add_option("--in", san_in, "input media")->required();
    san_cmd->add_option("--out", san_out, "output media")->required();

    // ---------------- eval ----------------
    auto* eval_cmd = app.add_subcommand("eval", "image quality metrics between two PNGs");
    std::string eval_ref, eval_test;
    bool eval_json = false;
    eval_cmd->add_option("--ref", eval_ref, "reference image")->required();
    eval_cmd->add_option("--test", eval_test, "test image")->required();
    eval_cmd->add_flag("--json", eval_json, "emit a JSON object");

    // ---------------- gen-data ----------------
    auto* gen_cmd = app.add_subcommand("gen-data", "write a synthetic dataset");
    std::string gen_out, gen_kind = "images";
    int gen_n = 100, gen_channels = 3, gen_size = 16, gen_frames = 2, gen_rate = 16000;
    std::uint64_t gen_seed = 7;
    gen_cmd->add_option("--out", gen_out, "output directory")->required();
    gen_cmd->add_option("--kind", gen_kind, "images | audio");
    gen_cmd->add_option("--n", gen_n);
    gen_cmd->add_option("--channels", gen_channels);
    gen_cmd->add_option("--size", gen_size, "square image size");
    gen_cmd->add_option("--frames", gen_frames, "frames per audio clip");
    gen_cmd->add_option("--rate", gen_rate);
    gen_cmd->add_option("--seed", gen_seed);

    // ---------------- experiment ----------------
    auto* exp_cmd = app.add_subcommand("experiment", "run an end-to-end study");
    std::string exp_which, exp_config, exp_out = "out";
    bool exp_train = false;
    exp_cmd->add_option("which", exp_which, "rq1 | rq2 | rq3 | audio")->required();
    exp_cmd->add_option("--config", exp_config, "key=value config file");
    exp_cmd->add_option("--out", exp_out, "output directory");
    exp_cmd->add_flag("--train", exp_train, "train missing model artifacts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*hide_cmd) {
            if (is_wav(hide_cover)) {
                if (hide_text.empty())
                    throw std::runtime_error("hide: .wav cover needs --text");
                AudioClip cover = load_wav(hide_cover);
                int bits = hide_bits == 4 && !hide_cmd->count("--bits") ? 1 : hide_bits;
                AudioClip container =
                    audio_lsb_hide(cover, TextPayload::from_text(hide_text), bits);
                save_wav(container, hide_out);
                std::printf("embedded %zu bytes into %s (n=%d)\n", hide_text.size(),
                            hide_out.c_str(), bits);
            } else {
                if (hide_secret.empty())
                    throw std::runtime_error("hide: .png cover needs --secret");
                ImageTensor cover = load_png(hide_cover);
                ImageTensor secret = load_png(hide_secret);
                save_png(lsb_hide(cover, secret, hide_bits), hide_out);
                std::printf("wrote container %s (n=%d)\n", hide_out.c_str(), hide_bits);
            }
        } else if (*reveal_cmd) {
            if (is_wav(reveal_in)) {
                int bits = reveal_bits == 4 && !reveal_cmd->count("--bits") ? 1 : reveal_bits;
                RevealedPayload p = audio_lsb_reveal(load_wav(reveal_in), bits);
                if (p.malformed)
                    std::fprintf(stderr, "warning: malformed header (%u bits declared)\n",
                                 p.header_bits);
                std::printf("%s\n", p.to_text().c_str());
            } else {
                if (reveal_out.empty()) throw std::runtime_error("reveal: .png needs --out");
                save_png(lsb_reveal(load_png(reveal_in), reveal_bits), reveal_out);
                std::printf("wrote revealed secret %s\n", reveal_out.c_str());
            }
        } else if (*th_cmd) {
            auto data = load_training_images(th_data);
            HideTrainConfig cfg;
            cfg.epochs = th_epochs;
            cfg.batch = th_batch;
            cfg.lr = th_lr;
            cfg.lambda_cover = th_lc;
            cfg.lambda_secret = th_ls;
            cfg.seed = th_seed;
            TrainedHidePair trained = train_hide_pair(data, cfg, th_base);
            nn::ModelMeta meta;
            meta.kind = 4;
            meta.seed = th_seed;
            meta.channels = trained.pair.channels;
            meta.height = trained.pair.height;
            meta.width = trained.pair.width;
            meta.hyper1 = th_base;
            save_model(th_out, meta, trained.pair.params());
            std::printf("trained %d epochs; cover mse %.5f, secret mse %.5f -> %s\n",
                        trained.pair.trained_epochs, trained.pair.final_cover_mse,
                        trained.pair.final_secret_mse, th_out.c_str());
        } else if (*td_cmd) {
            auto data = load_training_images(td_data);
            NoiseSchedule sched = cosine_schedule(td_T);
            DiffTrainConfig cfg;
            cfg.epochs = td_epochs;
            cfg.batch = td_batch;
            cfg.lr = td_lr;
            cfg.seed = td_seed;
            TrainedDenoiser trained = train_denoiser(data, sched, cfg, td_base);
            nn::ModelMeta meta;
            meta.kind = 1;
            meta.seed = td_seed;
            meta.horizon = td_T;
            meta.schedule_kind = 1;
            meta.channels = trained.model.channels;
            meta.height = trained.model.height;
            meta.width = trained.model.width;
            meta.hyper1 = td_base;
            save_model(td_out, meta, trained.model.params());
            std::printf("trained %d epochs; loss %.4f -> %.4f; saved %s\n", td_epochs,
                        trained.epoch_loss.front(), trained.epoch_loss.back(), td_out.c_str());
        } else if (*tv_cmd) {
            auto data = load_training_images(tv_data);
            VaeTrainConfig cfg;
            cfg.epochs = tv_epochs;
            cfg.batch = tv_batch;
            cfg.lr = tv_lr;
            cfg.latent = tv_latent;
            cfg.seed = tv_seed;
            TrainedVae trained = train_vae(data, cfg);
            nn::ModelMeta meta;
            meta.kind = 3;
            meta.seed = tv_seed;
            meta.channels = trained.model.channels;
            meta.height = trained.model.height;
            meta.width = trained.model.width;
            meta.hyper1 = tv_latent;
            meta.hyper2 = trained.model.base;
            save_model(tv_out, meta, trained.model.params());
            std::printf("trained %d epochs; loss %.4f -> %.4f; saved %s\n", tv_epochs,
                        trained.epoch_loss.front(), trained.epoch_loss.back(), tv_out.c_str());
        } else if (*ta_cmd) {
            std::vector<std::vector<double>> frames;
            if (!ta_data.empty()) {
                for (const auto& e : fs::directory_iterator(ta_data))
                    if (e.is_regular_file() && e.path().extension() == ".wav") {
                        std::vector<double> unit = audio_to_unit(load_wav(e.path().string()));
                        for (std::size_t s = 0; s + ta_frame <= unit.size(); s += ta_frame)
                            frames.emplace_back(unit.begin() + s, unit.begin() + s + ta_frame);
                    }
            } else {
                auto clips = gen_synthetic_clips(ta_clips, ta_frames_per_clip, ta_frame, ta_rate,
                                                 ta_seed);
                for (const auto& clip : clips) {
                    std::vector<double> unit = audio_to_unit(clip);
                    for (std::size_t s = 0; s + ta_frame <= unit.size(); s += ta_frame)
                        frames.emplace_back(unit.begin() + s, unit.begin() + s + ta_frame);
                }
            }
            if (frames.empty()) throw std::runtime_error("no training frames");
            NoiseSchedule sched = cosine_schedule(ta_T);
            DiffTrainConfig cfg;
            cfg.epochs = ta_epochs;
            cfg.batch = ta_batch;
            cfg.lr = ta_lr;
            cfg.seed = ta_seed;
            TrainedAudioDenoiser trained =
                train_audio_denoiser(frames, sched, cfg, ta_frame, ta_base);
            nn::ModelMeta meta;
            meta.kind = 2;
            meta.seed = ta_seed;
            meta.horizon = ta_T;
            meta.schedule_kind = 1;
            meta.channels = 1;
            meta.height = 1;
            meta.width = ta_frame;
            meta.hyper1 = ta_base;
            save_model(ta_out, meta, trained.model.params());
            std::printf("trained %d epochs on %zu frames; loss %.4f -> %.4f; saved %s\n",
                        ta_epochs, frames.size(), trained.epoch_loss.front(),
                        trained.epoch_loss.back(), ta_out.c_str());
        } else if (*san_cmd) {
            SeededRng rng(san_seed);
            X0Mode mode = san_x0 == "paper" ? X0Mode::paper_eq7 : X0Mode::exact_inversion;
            if (is_wav(san_in)) {
                AudioClip in = load_wav(san_in);
                AudioClip out_clip = in;
                if (san_method == "gaussian") {
                    out_clip = gaussian_sanitize(in, san_sigma, rng);
                } else if (san_method == "dm-suds" || san_method == "dm-suds-direct") {
                    if (san_model.empty()) throw std::runtime_error("sanitize: needs --model");
                    nn::ModelMeta meta;
                    AudioDenoiser model = load_audio_denoiser(san_model, meta);
                    NoiseSchedule sched = schedule_from_meta(meta);
                    int t = san_t > 0 ? san_t : sched.T / 2;
                    out_clip = san_method == "dm-suds"
                                   ? dm_suds(in, t, predictor_of(model), sched, rng,
                                             model.frame_len)
                                   : dm_suds_direct(in, t, predictor_of(model), sched,
                                                    model.frame_len);
                } else {
                    throw std::runtime_error("sanitize: method '" + san_method +
                                             "' not available for .wav");
                }
                save_wav(out_clip, san_out);
            } else {
                ImageTensor in = load_png(san_in);
                ImageTensor out_img = in;
                if (san_method == "gaussian") {
                    out_img = gaussian_sanitize(in, san_sigma, rng);
                } else if (san_method == "dct-noise") {
                    out_img = dct_noise_sanitize(in, san_sigma, rng);
                } else if (san_method == "vae") {
                    if (san_model.empty()) throw std::runtime_error("sanitize: needs --model");
                    VaeModel vae = load_vae(san_model);
                    out_img = vae_sanitize(in, vae);
                } else if (san_method == "dm-suds" || san_method == "dm-suds-direct") {
                    if (san_model.empty()) throw std::runtime_error("sanitize: needs --model");
                    nn::ModelMeta meta;
                    Denoiser2d model = load_image_denoiser(san_model, meta);
                    NoiseSchedule sched = schedule_from_meta(meta);
                    int t = san_t > 0 ? san_t : sched.T / 2;
                    out_img = san_method == "dm-suds"
                                  ? dm_suds(in, t, predictor_of(model), sched, rng, mode)
                                  : dm_suds_direct(in, t, predictor_of(model), sched, mode);
                } else {
                    throw std::runtime_error("sanitize: unknown method '" + san_method + "'");
                }
                save_png(out_img, san_out);
            }
            std::printf("sanitized %s -> %s (%s)\n", san_in.c_str(), san_out.c_str(),
                        san_method.c_str());
        } else if (*eval_cmd) {
            ImageTensor ref = load_png(eval_ref);
            ImageTensor test = load_png(eval_test);
            double m = mse(ref, test);
            double p = psnr_from_mse(m);
            double s = ssim(ref, test);
            auto n = ncc(ref, test);
            if (eval_json) {
                nlohmann::json j;
                j["mse"] = m;
                if (std::isfinite(p))
                    j["psnr_db"] = p;
                else
                    j["psnr_db"] = "inf";
                j["ssim"] = s;
                if (n.has_value())
                    j["ncc"] = *n;
                else
                    j["ncc"] = "undefined";
                std::printf("%s\n", j.dump().c_str());
            } else {
                std::printf("mse      %s\n", format_double(m).c_str());
                std::printf("psnr_db  %s\n", format_double(p).c_str());
                std::printf("ssim     %s\n", format_double(s).c_str());
                std::printf("ncc      %s\n",
                            n.has_value() ? format_double(*n).c_str() : "undefined");
            }
        } else if (*gen_cmd) {
            fs::create_directories(gen_out);
            if (gen_kind == "images") {
                auto imgs = gen_synthetic_images(gen_n, gen_channels, gen_size, gen_size, gen_seed);
                for (int i = 0; i < gen_n; ++i) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "img_%05d.png", i);
                    save_png(imgs[i], (fs::path(gen_out) / name).string());
                }
            } else if (gen_kind == "audio") {
                auto clips = gen_synthetic_clips(gen_n, gen_frames, 4096, gen_rate, gen_seed);
                for (int i = 0; i < gen_n; ++i) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "clip_%05d.wav", i);
                    save_wav(clips[i], (fs::path(gen_out) / name).string());
                }
            } else {
                throw std::runtime_error("gen-data: kind must be images or audio");
            }
            std::printf("wrote %d %s to %s\n", gen_n, gen_kind.c_str(), gen_out.c_str());
        } else if (*exp_cmd) {
            ExperimentConfig cfg = exp_config.empty()
                                       ? ExperimentConfig::from_kv(KvConfig::parse_string(""))
                                       : ExperimentConfig::load(exp_config);
            if (exp_train) cfg.train_if_missing = true;
            fs::create_directories(exp_out);
            if (exp_which == "rq1") {
                auto rows = run_rq1(cfg, exp_out);
                std::printf("%s", result_csv(rows).c_str());
            } else if (exp_which == "rq2") {
                run_rq2(cfg, exp_out);
                std::printf("wrote rq2_results.csv and rq2_ncc_vs_t.svg to %s\n",
                            exp_out.c_str());
            } else if (exp_which == "rq3") {
                run_rq3(cfg, exp_out);
                std::printf("wrote rq3_results.csv and rq3_ncc_vs_t.svg to %s\n",
                            exp_out.c_str());
            } else if (exp_which == "audio") {
                AudioCaseResult res = run_audio_case(cfg, exp_out);
                std::printf("clips %zu: pre BER %.4f, preservation MSE %.6f, post BER %.4f, "
                            "mean RR %.4f\n",
                            res.rows.size(), res.mean_pre_ber, res.mean_mse, res.mean_post_ber,
                            res.mean_rr);
            } else {
                throw std::runtime_error("experiment: expected rq1 | rq2 | rq3 | audio");
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
