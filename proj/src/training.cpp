#include "ctbayes/training.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "ctbayes/bnua.hpp"
#include "ctbayes/rng.hpp"

namespace ctbayes {

namespace fs = std::filesystem;
using nlohmann::json;

at::Generator make_stream(uint64_t seed, std::initializer_list<uint64_t> tags) {
  return at::make_generator<at::CPUGeneratorImpl>(derive_seed(seed, tags));
}

torch::Tensor images_to_tensor(const std::vector<Image>& images, torch::Dtype dtype) {
  if (images.empty()) throw std::invalid_argument("images_to_tensor: no images");
  const int64_t h = images.front().height, w = images.front().width;
  auto out = torch::empty({static_cast<int64_t>(images.size()), 1, h, w}, torch::kFloat32);
  float* dst = out.data_ptr<float>();
  for (const auto& img : images) {
    if (img.height != h || img.width != w) throw ShapeError("images_to_tensor: images differ in shape");
    std::copy(img.pixels.begin(), img.pixels.end(), dst);
    dst += h * w;
  }
  return dtype == torch::kFloat32 ? out : out.to(dtype);
}

Image tensor_to_image(const torch::Tensor& t) {
  const auto flat = t.detach().to(torch::kFloat32).contiguous();
  if (flat.dim() < 2) throw ShapeError("tensor_to_image: need at least 2 dims");
  const int64_t h = flat.size(-2), w = flat.size(-1);
  if (flat.numel() != h * w) throw ShapeError("tensor_to_image: tensor holds more than one image");
  Image img(h, w);
  std::copy_n(flat.data_ptr<float>(), h * w, img.pixels.begin());
  return img;
}

// ---------------------------------------------------------------------------
// Losses

PerceptualLossImpl::PerceptualLossImpl(const PerceptualConfig& cfg) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(cfg.seed);
  int64_t in = 1;
  for (size_t i = 0; i < cfg.channels.size(); ++i) {
    const int64_t out = cfg.channels[i];
    const double std = std::sqrt(2.0 / static_cast<double>(in * 9));
    weights_.push_back(register_buffer("w" + std::to_string(i), torch::randn({out, in, 3, 3}, gen) * std));
    biases_.push_back(register_buffer("b" + std::to_string(i), torch::zeros({out})));
    in = out;
  }
}

torch::Tensor PerceptualLossImpl::features(const torch::Tensor& x) const {
  torch::Tensor h = x;
  for (size_t i = 0; i < weights_.size(); ++i) h = torch::relu(torch::conv2d(h, weights_[i], biases_[i], 1, 1));
  return h;
}

torch::Tensor PerceptualLossImpl::per_image(const torch::Tensor& y, const torch::Tensor& y_hat) const {
  return (features(y) - features(y_hat)).pow(2).flatten(1).mean(1);
}

ReconstructionTerms reconstruction_terms(const torch::Tensor& y, const torch::Tensor& y_hat,
                                         const PerceptualLoss& pl) {
  if (y.sizes() != y_hat.sizes()) throw ShapeError("reconstruction_loss: target and estimate shapes differ");
  return {(y - y_hat).abs().flatten(1).mean(1), pl->per_image(y, y_hat)};
}

torch::Tensor reconstruction_loss(const torch::Tensor& y, const torch::Tensor& y_hat, const PerceptualLoss& pl) {
  const auto t = reconstruction_terms(y, y_hat, pl);
  return (t.l1 + t.pl).sum();
}

// ---------------------------------------------------------------------------
// Trainer

namespace {

const uint64_t kTagInit = hash_tag("init");
const uint64_t kTagDiscInit = hash_tag("disc-init");
const uint64_t kTagStep = hash_tag("step");
const uint64_t kTagPretrain = hash_tag("pretrain");
const uint64_t kTagTrain = hash_tag("train");
const uint64_t kTagShuffle = hash_tag("shuffle");
const uint64_t kTagValidation = hash_tag("validation");
const uint64_t kTagEval = hash_tag("eval");

}  // namespace

Trainer::Trainer(const ExperimentConfig& cfg, int64_t n_train_patches, torch::Dtype dtype)
    : cfg_(cfg), dtype_(dtype) {
  cfg_.validate();
  if (n_train_patches < 1) throw std::invalid_argument("Trainer: need at least one training patch");
  kl_scale_ = cfg_.kl_scale.value_or(1.0 / static_cast<double>(n_train_patches));

  auto init_gen = make_stream(cfg_.seed, {kTagInit});
  net_ = ReconstructionNet(cfg_.model, init_gen);
  auto disc_gen = make_stream(cfg_.seed, {kTagDiscInit});
  disc_ = rda::Discriminator(cfg_.discriminator, disc_gen);
  perceptual_ = PerceptualLoss(cfg_.perceptual);
  net_->to(dtype_);
  disc_->to(dtype_);
  perceptual_->to(dtype_);

  // Deterministic phase until begin_bayesian_phase().
  net_->set_mean_only(true);
  for (auto& p : net_->sigma_parameters()) p.set_requires_grad(false);
  build_optimizers();
}

void Trainer::build_optimizers() {
  std::vector<torch::Tensor> params;
  for (auto& p : net_->parameters())
    if (p.requires_grad()) params.push_back(p);
  recon_opt_ = std::make_unique<torch::optim::Adam>(params, torch::optim::AdamOptions(cfg_.learning_rate));
  disc_opt_ = std::make_unique<torch::optim::Adam>(disc_->parameters(), torch::optim::AdamOptions(cfg_.learning_rate));
}

void Trainer::begin_bayesian_phase() {
  net_->moped(cfg_.moped_delta);
  const bool bayesian = !cfg_.freeze_sigma;
  net_->set_mean_only(!bayesian);
  for (auto& p : net_->sigma_parameters()) p.set_requires_grad(bayesian);
  build_optimizers();
}

ForwardPass Trainer::forward(const DomainBatch& batch, at::Generator& gen) {
  ForwardPass out{net_->mc_forward(batch.source_ldct, cfg_.mc_samples, gen), std::nullopt};
  if (cfg_.uses_target()) {
    if (!batch.target_ldct.defined()) throw std::invalid_argument("batch lacks target-domain LDCT");
    out.target = net_->mc_forward(batch.target_ldct, cfg_.mc_samples, gen);
  }
  return out;
}

LossTerms Trainer::assemble(const DomainBatch& batch, const ForwardPass& fwd) {
  LossTerms t;
  const auto rec = reconstruction_terms(batch.source_ndct, fwd.source.y_hat, perceptual_);
  const auto zero = torch::zeros({}, fwd.source.y_hat.options());
  t.raw[0] = rec.l1.sum();
  t.raw[1] = rec.pl.sum();
  t.raw[2] = net_->kl_encoder();
  t.raw[3] = net_->kl_decoder();
  t.raw[4] = fwd.target ? bnua::bnua_loss(bnua::covariances_from_stack(fwd.source.z_samples),
                                          bnua::covariances_from_stack(fwd.target->z_samples))
                        : zero;
  t.raw[5] = cfg_.beta2 > 0.0 ? rda::lsgan_generator_loss(disc_->forward(fwd.source.residual)) : zero;
  t.weight = {1.0, 1.0, kl_scale_, kl_scale_, cfg_.beta1, cfg_.beta2};
  t.total = t.weighted(0);
  for (size_t i = 1; i < t.raw.size(); ++i) t.total = t.total + t.weighted(i);
  return t;
}

LossRecord Trainer::train_step(const DomainBatch& batch, at::Generator& gen) {
  LossRecord record;
  const ForwardPass fwd = forward(batch, gen);

  if (cfg_.beta2 > 0.0) {
    disc_->set_requires_grad(true);
    const auto d_loss = rda::lsgan_discriminator_loss(disc_->forward(fwd.target->residual.detach()),
                                                      disc_->forward(fwd.source.residual.detach()));
    disc_opt_->zero_grad();
    d_loss.backward();
    disc_opt_->step();
    record.discriminator = d_loss.item<double>();
  }

  disc_->set_requires_grad(false);
  const LossTerms terms = assemble(batch, fwd);
  record.total = terms.total.item<double>();
  for (size_t i = 0; i < terms.raw.size(); ++i) {
    record.raw[i] = terms.raw[i].item<double>();
    record.weighted[i] = record.raw[i] * terms.weight[i];
  }
  if (!std::isfinite(record.total)) {
    disc_->set_requires_grad(true);
    std::ostringstream msg;
    msg << "non-finite training loss: total=" << record.total;
    for (size_t i = 0; i < kLossComponentNames.size(); ++i) msg << ' ' << kLossComponentNames[i] << '=' << record.raw[i];
    throw NonFiniteLossError(msg.str());
  }
  recon_opt_->zero_grad();
  terms.total.backward();
  recon_opt_->step();
  disc_->set_requires_grad(true);
  return record;
}

double Trainer::pretrain_step(const DomainBatch& batch) {
  auto gen = make_stream(cfg_.seed, {kTagPretrain});  // unused in mean-only mode
  const auto y_hat = net_->forward(batch.source_ldct, gen);
  const auto loss = reconstruction_loss(batch.source_ndct, y_hat, perceptual_);
  recon_opt_->zero_grad();
  loss.backward();
  recon_opt_->step();
  return loss.item<double>();
}

void Trainer::save_checkpoint(const fs::path& path) const {
  torch::serialize::OutputArchive root;
  root.write("schema_version", c10::IValue(static_cast<int64_t>(kCheckpointSchemaVersion)));
  root.write("config_json", c10::IValue(json(cfg_).dump()));
  torch::serialize::OutputArchive net_ar, disc_ar, ropt_ar, dopt_ar;
  net_->save(net_ar);
  disc_->save(disc_ar);
  recon_opt_->save(ropt_ar);
  disc_opt_->save(dopt_ar);
  root.write("net", net_ar);
  root.write("discriminator", disc_ar);
  root.write("recon_optimizer", ropt_ar);
  root.write("disc_optimizer", dopt_ar);
  root.write("progress_epoch", c10::IValue(progress_.epoch));
  root.write("progress_best_val_loss", c10::IValue(progress_.best_val_loss));
  root.write("progress_best_epoch", c10::IValue(progress_.best_epoch));
  root.write("progress_epochs_since_best", c10::IValue(progress_.epochs_since_best));
  // Every random stream is derived from (seed, tags); the seed plus the epoch
  // counter is the complete generator state.
  root.write("rng_seed", c10::IValue(static_cast<int64_t>(cfg_.seed)));

  const fs::path tmp = path.string() + ".tmp";
  try {
    root.save_to(tmp.string());
  } catch (const c10::Error& e) {
    throw std::runtime_error("checkpoint write failed for " + path.string() + ": " + e.what_without_backtrace());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("checkpoint write failed for " + path.string() + ": " + ec.message());
}

namespace {

torch::serialize::InputArchive open_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw std::runtime_error("checkpoint not found: " + path.string());
  torch::serialize::InputArchive root;
  try {
    root.load_from(path.string());
  } catch (const c10::Error& e) {
    throw std::runtime_error("unreadable checkpoint " + path.string() + ": " + e.what_without_backtrace());
  }
  c10::IValue version;
  root.read("schema_version", version);
  if (version.toInt() != kCheckpointSchemaVersion) {
    throw std::runtime_error("checkpoint " + path.string() + " has schema version " +
                             std::to_string(version.toInt()) + ", expected " +
                             std::to_string(kCheckpointSchemaVersion));
  }
  return root;
}

ExperimentConfig config_from_archive(torch::serialize::InputArchive& root) {
  c10::IValue cfg_json;
  root.read("config_json", cfg_json);
  return config_from_json(json::parse(cfg_json.toStringRef()));
}

}  // namespace

ExperimentConfig read_checkpoint_config(const fs::path& path) {
  auto root = open_checkpoint(path);
  return config_from_archive(root);
}

void Trainer::load_checkpoint(const fs::path& path) {
  auto root = open_checkpoint(path);
  const ExperimentConfig stored = config_from_archive(root);
  if (json(stored).at("model") != json(cfg_).at("model")) {
    throw std::runtime_error("checkpoint architecture does not match the configuration");
  }
  if (json(stored).at("discriminator") != json(cfg_).at("discriminator")) {
    throw std::runtime_error("checkpoint discriminator does not match the configuration");
  }
  // Parameter sets (and hence optimizer layouts) depend on the phase flags.
  begin_bayesian_phase();
  torch::serialize::InputArchive net_ar, disc_ar, ropt_ar, dopt_ar;
  root.read("net", net_ar);
  root.read("discriminator", disc_ar);
  root.read("recon_optimizer", ropt_ar);
  root.read("disc_optimizer", dopt_ar);
  net_->load(net_ar);
  disc_->load(disc_ar);
  recon_opt_->load(ropt_ar);
  disc_opt_->load(dopt_ar);
  c10::IValue v;
  root.read("progress_epoch", v);
  progress_.epoch = v.toInt();
  root.read("progress_best_val_loss", v);
  progress_.best_val_loss = v.toDouble();
  root.read("progress_best_epoch", v);
  progress_.best_epoch = v.toInt();
  root.read("progress_epochs_since_best", v);
  progress_.epochs_since_best = v.toInt();
  // load() leaves requires_grad as stored on the module; re-apply the phase.
  const bool bayesian = !cfg_.freeze_sigma;
  for (auto& p : net_->sigma_parameters()) p.set_requires_grad(bayesian);
}

LoadedModel load_model(const fs::path& checkpoint) {
  auto root = open_checkpoint(checkpoint);
  LoadedModel out;
  out.config = config_from_archive(root);
  auto init_gen = make_stream(out.config.seed, {kTagInit});
  out.net = ReconstructionNet(out.config.model, init_gen);
  torch::serialize::InputArchive net_ar;
  root.read("net", net_ar);
  out.net->load(net_ar);
  out.net->set_mean_only(out.config.freeze_sigma);
  out.net->eval();
  out.perceptual = PerceptualLoss(out.config.perceptual);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

torch::Dtype dtype_of(ReconstructionNet& net) { return net->parameters().front().scalar_type(); }

}  // namespace

SplitEvaluation evaluate_slices(ReconstructionNet& net, const PerceptualLoss& pl, const std::vector<SlicePair>& slices,
                                int64_t mc_samples, uint64_t seed, bool with_metrics) {
  torch::NoGradGuard no_grad;
  SplitEvaluation out;
  const auto dtype = dtype_of(net);
  std::vector<torch::Tensor> covs;
  double loss_sum = 0.0;
  for (size_t i = 0; i < slices.size(); ++i) {
    const auto& s = slices[i];
    auto gen = make_stream(seed, {kTagEval, static_cast<uint64_t>(i)});
    const auto x = images_to_tensor({s.ldct}, dtype);
    const auto y = images_to_tensor({s.ndct}, dtype);
    const McForward fwd = net->mc_forward(x, mc_samples, gen);
    loss_sum += reconstruction_loss(y, fwd.y_hat, pl).item<double>();
    covs.push_back(bnua::covariances_from_stack(fwd.z_samples));

    const Image recon = tensor_to_image(fwd.y_hat.clamp(0.0, 1.0));
    if (with_metrics) out.report.add(s.domain + "_" + std::to_string(i), metrics::evaluate(s.ndct, recon));

    const Image raw = tensor_to_image(fwd.y_hat);
    const auto mask = flat_region_mask(s.ndct);
    for (size_t p = 0; p < mask.size(); ++p) {
      if (!mask[p]) continue;
      out.flat_residuals.push_back(s.ldct.pixels[p] - raw.pixels[p]);
      out.flat_noise.push_back(s.ldct.pixels[p] - s.ndct.pixels[p]);
    }
  }
  out.mean_val_loss = slices.empty() ? 0.0 : loss_sum / static_cast<double>(slices.size());
  if (!covs.empty()) out.covariances = torch::cat(covs, 0);
  return out;
}

torch::Tensor slice_covariances(ReconstructionNet& net, const std::vector<Image>& ldct, int64_t mc_samples,
                                uint64_t seed) {
  torch::NoGradGuard no_grad;
  const auto dtype = dtype_of(net);
  std::vector<torch::Tensor> covs;
  for (size_t i = 0; i < ldct.size(); ++i) {
    auto gen = make_stream(seed, {kTagEval, static_cast<uint64_t>(i)});
    const auto fwd = net->mc_forward(images_to_tensor({ldct[i]}, dtype), mc_samples, gen);
    covs.push_back(bnua::covariances_from_stack(fwd.z_samples));
  }
  return torch::cat(covs, 0);
}

// ---------------------------------------------------------------------------
// Epoch log

std::string format_log_row(const EpochLogRow& row) {
  std::ostringstream os;
  os.precision(17);
  os << row.epoch;
  for (double v : row.losses) os << ',' << v;
  os << ',' << row.val_psnr << ',' << row.val_ssim << ',' << row.val_gmsd << ',' << row.val_dss << ','
     << row.val_bnua_disc;
  return os.str();
}

std::vector<EpochLogRow> read_epoch_log(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open epoch log " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kEpochLogHeader) {
    throw std::runtime_error(path.string() + ": row 1: unexpected header");
  }
  std::vector<EpochLogRow> rows;
  int64_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    try {
      while (std::getline(ss, cell, ',')) {
        size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
      }
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(line_no) + ": non-numeric field '" + cell +
                               "'");
    }
    if (fields.size() != 12) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(line_no) + ": expected 12 fields, got " +
                               std::to_string(fields.size()));
    }
    EpochLogRow r;
    r.epoch = static_cast<int64_t>(fields[0]);
    std::copy_n(fields.begin() + 1, 6, r.losses.begin());
    r.val_psnr = fields[7];
    r.val_ssim = fields[8];
    r.val_gmsd = fields[9];
    r.val_dss = fields[10];
    r.val_bnua_disc = fields[11];
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// fit

namespace {

struct EpochPatches {
  torch::Tensor src_x, src_y, tgt_x;
  int64_t steps = 0;
  std::vector<int64_t> src_order, tgt_order;
};

EpochPatches make_epoch_patches(const ExperimentConfig& cfg, const std::vector<SlicePair>& source,
                                const std::vector<Image>& target, uint64_t phase_tag, int64_t epoch,
                                torch::Dtype dtype) {
  const int n = static_cast<int>(cfg.patches_per_slice);
  const int size = static_cast<int>(cfg.patch_size);
  std::vector<Image> sx, sy, tx;
  for (size_t i = 0; i < source.size(); ++i) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {phase_tag, static_cast<uint64_t>(epoch), 0, i}));
    for (auto& p : extract_patches(source[i], n, size, rng)) {
      sx.push_back(std::move(p.x));
      sy.push_back(std::move(p.y));
    }
  }
  if (cfg.uses_target()) {
    for (size_t i = 0; i < target.size(); ++i) {
      std::mt19937_64 rng(derive_seed(cfg.seed, {phase_tag, static_cast<uint64_t>(epoch), 1, i}));
      for (auto& p : extract_patches(target[i], n, size, rng)) tx.push_back(std::move(p));
    }
  }
  EpochPatches out;
  out.src_x = images_to_tensor(sx, dtype);
  out.src_y = images_to_tensor(sy, dtype);
  std::mt19937_64 shuffle(derive_seed(cfg.seed, {phase_tag, static_cast<uint64_t>(epoch), kTagShuffle}));
  out.src_order.resize(sx.size());
  std::iota(out.src_order.begin(), out.src_order.end(), 0);
  std::shuffle(out.src_order.begin(), out.src_order.end(), shuffle);
  if (!tx.empty()) {
    out.tgt_x = images_to_tensor(tx, dtype);
    out.tgt_order.resize(tx.size());
    std::iota(out.tgt_order.begin(), out.tgt_order.end(), 0);
    std::shuffle(out.tgt_order.begin(), out.tgt_order.end(), shuffle);
  }
  out.steps = std::max<int64_t>(1, static_cast<int64_t>(sx.size()) / cfg.batch_size);
  return out;
}

DomainBatch batch_at(const EpochPatches& ep, int64_t step, int64_t batch_size) {
  const auto n_src = static_cast<int64_t>(ep.src_order.size());
  const int64_t b = std::min(batch_size, n_src);
  std::vector<int64_t> si, ti;
  for (int64_t k = 0; k < b; ++k) {
    si.push_back(ep.src_order[static_cast<size_t>((step * b + k) % n_src)]);
    if (!ep.tgt_order.empty()) {
      ti.push_back(ep.tgt_order[static_cast<size_t>((step * b + k) % static_cast<int64_t>(ep.tgt_order.size()))]);
    }
  }
  DomainBatch batch;
  const auto sidx = torch::tensor(si, torch::kInt64);
  batch.source_ldct = ep.src_x.index_select(0, sidx);
  batch.source_ndct = ep.src_y.index_select(0, sidx);
  if (!ti.empty()) batch.target_ldct = ep.tgt_x.index_select(0, torch::tensor(ti, torch::kInt64));
  return batch;
}

void write_histograms(const fs::path& path, const SplitEvaluation& source, const SplitEvaluation& target,
                      const std::string& source_name, const std::string& target_name) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.precision(12);
  os << "domain,kind,bin,lo,hi,density\n";
  const double width = (rda::kHistogramHi - rda::kHistogramLo) / rda::kHistogramBins;
  auto emit = [&](const std::string& domain, const char* kind, const std::vector<float>& values) {
    const auto density = rda::density_histogram(values);
    for (int b = 0; b < rda::kHistogramBins; ++b) {
      os << domain << ',' << kind << ',' << b << ',' << rda::kHistogramLo + b * width << ','
         << rda::kHistogramLo + (b + 1) * width << ',' << density[static_cast<size_t>(b)] << '\n';
    }
  };
  emit(source_name, "residual", source.flat_residuals);
  emit(source_name, "noise", source.flat_noise);
  emit(target_name, "residual", target.flat_residuals);
  emit(target_name, "noise", target.flat_noise);
}

std::string checkpoint_name(int64_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_epoch_%03lld.pt", static_cast<long long>(epoch));
  return buf;
}

}  // namespace

FitResult fit(const ExperimentConfig& cfg, const FitOptions& options) {
  cfg.validate();
  const DatasetView data(cfg.data_dir);
  if (data.source() != cfg.data.source_domain || data.target() != cfg.data.target_domain) {
    throw std::runtime_error("dataset in " + cfg.data_dir + " was built for " + data.source() + " -> " +
                             data.target() + ", config asks for " + cfg.data.source_domain + " -> " +
                             cfg.data.target_domain);
  }
  const auto source_train = data.source_train();
  const auto target_train = data.target_train();
  const auto source_val = data.paired(data.source(), "val");
  const auto target_val = data.paired(data.target(), "val");
  const int64_t n_train_patches = static_cast<int64_t>(source_train.size()) * cfg.patches_per_slice;

  FitResult result;
  result.run_dir = cfg.run_dir;
  const fs::path ckpt_dir = result.run_dir / "checkpoints";
  const fs::path hist_dir = result.run_dir / "histograms";
  fs::create_directories(ckpt_dir);
  fs::create_directories(hist_dir);
  save_config(cfg, (result.run_dir / "config.json").string());
  const fs::path log_path = result.run_dir / "epoch_log.csv";
  const fs::path sel_path = result.run_dir / "selection.csv";
  result.last_checkpoint = ckpt_dir / "last.pt";
  result.best_checkpoint = ckpt_dir / "best.pt";

  Trainer trainer(cfg, n_train_patches);
  const auto dtype = trainer.dtype();

  if (options.resume_from) {
    trainer.load_checkpoint(*options.resume_from);
    // Drop log rows beyond the restored epoch.
    std::vector<EpochLogRow> kept;
    if (fs::exists(log_path))
      for (const auto& r : read_epoch_log(log_path))
        if (r.epoch <= trainer.progress().epoch) kept.push_back(r);
    std::ofstream os(log_path);
    os << kEpochLogHeader << '\n';
    for (const auto& r : kept) os << format_log_row(r) << '\n';
    result.log = kept;
  } else {
    for (int64_t e = 0; e < cfg.pretrain_epochs; ++e) {
      const EpochPatches ep = make_epoch_patches(cfg, source_train, {}, kTagPretrain, e, dtype);
      double sum = 0.0;
      for (int64_t s = 0; s < ep.steps; ++s) sum += trainer.pretrain_step(batch_at(ep, s, cfg.batch_size));
      if (options.verbose) std::cout << "pretrain epoch " << e + 1 << " loss " << sum / ep.steps << std::endl;
    }
    trainer.begin_bayesian_phase();
    trainer.save_checkpoint(ckpt_dir / checkpoint_name(0));
    trainer.save_checkpoint(result.last_checkpoint);
    trainer.save_checkpoint(result.best_checkpoint);
    std::ofstream(log_path) << kEpochLogHeader << '\n';
    std::ofstream(sel_path) << "epoch,val_loss,best\n";
  }

  const uint64_t val_seed = derive_seed(cfg.seed, {kTagValidation});
  int64_t run_this_call = 0;
  auto& prog = trainer.progress();
  while (prog.epoch < cfg.epochs) {
    if (options.max_epochs_this_call && run_this_call >= *options.max_epochs_this_call) break;
    if (prog.epochs_since_best >= cfg.patience) break;
    const int64_t epoch = prog.epoch + 1;

    const EpochPatches ep = make_epoch_patches(cfg, source_train, target_train, kTagTrain, epoch, dtype);
    EpochLogRow row;
    row.epoch = epoch;
    for (int64_t s = 0; s < ep.steps; ++s) {
      auto gen = make_stream(cfg.seed, {kTagStep, static_cast<uint64_t>(epoch), static_cast<uint64_t>(s)});
      const LossRecord rec = trainer.train_step(batch_at(ep, s, cfg.batch_size), gen);
      for (size_t i = 0; i < row.losses.size(); ++i) row.losses[i] += rec.raw[i] / static_cast<double>(ep.steps);
    }

    const SplitEvaluation src_eval =
        evaluate_slices(trainer.net(), trainer.perceptual(), source_val, cfg.val_mc_samples, val_seed, false);
    const SplitEvaluation tgt_eval =
        evaluate_slices(trainer.net(), trainer.perceptual(), target_val, cfg.val_mc_samples, val_seed, true);
    row.val_psnr = tgt_eval.report.aggregate(&metrics::MetricValues::psnr).mean;
    row.val_ssim = tgt_eval.report.aggregate(&metrics::MetricValues::ssim).mean;
    row.val_gmsd = tgt_eval.report.aggregate(&metrics::MetricValues::gmsd).mean;
    row.val_dss = tgt_eval.report.aggregate(&metrics::MetricValues::dss).mean;
    row.val_bnua_disc = bnua::bnua_loss(src_eval.covariances, tgt_eval.covariances).item<double>();

    std::ofstream(log_path, std::ios::app) << format_log_row(row) << '\n';
    result.log.push_back(row);
    char hist_name[48];
    std::snprintf(hist_name, sizeof hist_name, "epoch_%03lld.csv", static_cast<long long>(epoch));
    write_histograms(hist_dir / hist_name, src_eval, tgt_eval, data.source(), data.target());

    prog.epoch = epoch;
    const bool improved = src_eval.mean_val_loss < prog.best_val_loss;
    if (improved) {
      prog.best_val_loss = src_eval.mean_val_loss;
      prog.best_epoch = epoch;
      prog.epochs_since_best = 0;
    } else {
      ++prog.epochs_since_best;
    }
    std::ofstream(sel_path, std::ios::app) << epoch << ',' << src_eval.mean_val_loss << ',' << (improved ? 1 : 0)
                                           << '\n';
    if (improved) trainer.save_checkpoint(result.best_checkpoint);
    if (epoch % cfg.checkpoint_every == 0) trainer.save_checkpoint(ckpt_dir / checkpoint_name(epoch));
    trainer.save_checkpoint(result.last_checkpoint);
    ++run_this_call;

    if (options.verbose) {
      std::cout << "epoch " << epoch << " l1 " << row.losses[0] << " pl " << row.losses[1] << " bnua "
                << row.losses[4] << " rda " << row.losses[5] << " | val psnr " << row.val_psnr << " ssim "
                << row.val_ssim << " disc " << row.val_bnua_disc << std::endl;
    }
  }
  result.best_epoch = prog.best_epoch;
  return result;
}

}  // namespace ctbayes
