#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascsr/train.hpp"
#include "test_support.hpp"

using namespace cascsr;
namespace ts = testsup;

TEST(MseLoss, TrivialValues) {
    Tensor4 pred(1, 1, 1, 1);
    Tensor4 target(1, 1, 1, 1);
    pred.at(0, 0, 0, 0) = 0.7;
    target.at(0, 0, 0, 0) = 0.2;
    const MseLoss l = mse_loss(pred, target);
    EXPECT_DOUBLE_EQ(l.value, 0.25);

    const MseLoss zero = mse_loss(target, target);
    EXPECT_DOUBLE_EQ(zero.value, 0.0);
}

TEST(MseLoss, GradientMatchesFiniteDifferences) {
    ts::Rng rng(101);
    Tensor4 pred = ts::random_tensor(2, 1, 4, 4, rng);
    const Tensor4 target = ts::random_tensor(2, 1, 4, 4, rng);
    const MseLoss l = mse_loss(pred, target);
    for (std::size_t i = 0; i < pred.size(); i += 3) {
        const double numeric =
            ts::central_difference(pred.data()[i], [&]() { return mse_loss(pred, target).value; });
        ts::expect_close_gradient(l.grad.data()[i], numeric, 1e-6);
    }
}

TEST(AdamStep, ZeroGradientLeavesParametersUnchanged) {
    const ErbpnModel m0 = make_erbpn_model(2, 1, 2, 3, 7);
    ErbpnModel m = m0;
    AdamState state = make_adam_state(m);
    adam_step(m, zeros_like(m), state);

    std::vector<const LayerParams*> a, b;
    for_each_layer(m0, [&](const LayerParams& p) { a.push_back(&p); });
    for_each_layer(m, [&](const LayerParams& p) { b.push_back(&p); });
    for (std::size_t l = 0; l < a.size(); ++l)
        for (std::size_t i = 0; i < a[l]->weights.size(); ++i)
            ASSERT_EQ(a[l]->weights.data()[i], b[l]->weights.data()[i]);
}

TEST(AdamStep, FirstStepMatchesClosedForm) {
    ErbpnModel m = make_erbpn_model(2, 1, 2, 3, 8);
    const ErbpnModel before = m;
    ErbpnModel grads = zeros_like(m);
    const double g = 0.37;
    for_each_layer(grads, [&](LayerParams& p) { p.weights.fill(g); });

    AdamState state = make_adam_state(m, 1e-3);
    adam_step(m, grads, state);

    // Step 1 with constant gradient: delta = lr * g / (|g| + eps).
    const double expected_delta = 1e-3 * g / (std::fabs(g) + 1e-8);
    std::vector<const LayerParams*> a, b;
    for_each_layer(before, [&](const LayerParams& p) { a.push_back(&p); });
    for_each_layer(m, [&](const LayerParams& p) { b.push_back(&p); });
    for (std::size_t l = 0; l < a.size(); ++l)
        for (std::size_t i = 0; i < a[l]->weights.size(); ++i)
            EXPECT_NEAR(a[l]->weights.data()[i] - b[l]->weights.data()[i], expected_delta, 1e-15);
}

TEST(AdamStep, IdenticalStreamsGiveIdenticalParameters) {
    ErbpnModel m1 = make_erbpn_model(2, 1, 2, 3, 9);
    ErbpnModel m2 = m1;
    AdamState s1 = make_adam_state(m1);
    AdamState s2 = make_adam_state(m2);
    ts::Rng rng(110);
    for (int step = 0; step < 5; ++step) {
        ErbpnModel grads = zeros_like(m1);
        for_each_layer(grads, [&](LayerParams& p) {
            for (double& w : p.weights.data()) w = rng.normal();
        });
        adam_step(m1, grads, s1);
        adam_step(m2, grads, s2);
    }
    std::vector<const LayerParams*> a, b;
    for_each_layer(m1, [&](const LayerParams& p) { a.push_back(&p); });
    for_each_layer(m2, [&](const LayerParams& p) { b.push_back(&p); });
    for (std::size_t l = 0; l < a.size(); ++l)
        for (std::size_t i = 0; i < a[l]->weights.size(); ++i)
            ASSERT_EQ(a[l]->weights.data()[i], b[l]->weights.data()[i]);
}

TEST(ScheduledLearningRate, HalvesEveryHundredEpochs) {
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(1e-4, 0), 1e-4);
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(1e-4, 99), 1e-4);
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(1e-4, 100), 5e-5);
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(1e-4, 250), 2.5e-5);
}

TEST(Dihedral, Rot180IsInvolution) {
    const ImagePlane img = ts::textured_image(6, 9, 120);
    const ImagePlane back = dihedral_transform(dihedral_transform(img, 2), 2);
    for (std::size_t i = 0; i < img.size(); ++i) ASSERT_EQ(back.data()[i], img.data()[i]);
}

TEST(Dihedral, QuarterTurnsComposeToIdentity) {
    const ImagePlane img = ts::textured_image(5, 7, 121);
    ImagePlane r = img;
    for (int k = 0; k < 4; ++k) r = dihedral_transform(r, 1);
    for (std::size_t i = 0; i < img.size(); ++i) ASSERT_EQ(r.data()[i], img.data()[i]);

    const ImagePlane t = dihedral_transform(img, 1);
    EXPECT_EQ(t.height(), 7);
    EXPECT_EQ(t.width(), 5);
}

TEST(Dihedral, FlipIsInvolution) {
    const ImagePlane img = ts::textured_image(6, 6, 122);
    const ImagePlane back = dihedral_transform(dihedral_transform(img, 4), 4);
    for (std::size_t i = 0; i < img.size(); ++i) ASSERT_EQ(back.data()[i], img.data()[i]);
}

TEST(Train, OverfitsSinglePatchPair) {
    const ImagePlane hr = ts::textured_image(32, 32, 123);
    const PatchPair pair = make_bicubic_pair(hr, 2);

    ErbpnModel model = make_erbpn_model(2, 2, 4, 6, 11);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.steps_per_epoch = 200;
    cfg.batch_size = 1;
    cfg.patch_size = 32;
    cfg.learning_rate = 1e-3;
    cfg.augment = false;
    cfg.seed = 3;
    const TrainReport report = train(model, {pair}, cfg);

    ASSERT_EQ(report.step_losses.size(), 200u);
    EXPECT_LT(report.step_losses.back(), 0.1 * report.step_losses.front())
        << "initial " << report.step_losses.front() << " final " << report.step_losses.back();
}

TEST(Train, SeedReproducibleLossCurve) {
    const ImagePlane hr = ts::textured_image(24, 24, 124);
    const std::vector<PatchPair> data{make_bicubic_pair(hr, 2)};

    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.steps_per_epoch = 5;
    cfg.batch_size = 2;
    cfg.patch_size = 16;
    cfg.seed = 77;

    ErbpnModel m1 = make_erbpn_model(2, 1, 3, 4, 21);
    ErbpnModel m2 = make_erbpn_model(2, 1, 3, 4, 21);
    const TrainReport r1 = train(m1, data, cfg);
    const TrainReport r2 = train(m2, data, cfg);
    ASSERT_EQ(r1.step_losses.size(), r2.step_losses.size());
    for (std::size_t i = 0; i < r1.step_losses.size(); ++i)
        ASSERT_EQ(r1.step_losses[i], r2.step_losses[i]);
}

TEST(Train, AugmentationKeepsPairsAligned) {
    // With augmentation on, training on a symmetric problem must still
    // converge; a misaligned LR/HR transform would stall the loss.
    const ImagePlane hr = ts::textured_image(24, 24, 125);
    const std::vector<PatchPair> data{make_bicubic_pair(hr, 2)};
    ErbpnModel model = make_erbpn_model(2, 1, 3, 4, 22);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.steps_per_epoch = 120;
    cfg.batch_size = 2;
    cfg.patch_size = 16;
    cfg.learning_rate = 1e-3;
    cfg.augment = true;
    cfg.seed = 5;
    const TrainReport report = train(model, data, cfg);
    EXPECT_LT(report.step_losses.back(), 0.5 * report.step_losses.front());
}

TEST(Train, RejectsEmptyAndInconsistentData) {
    ErbpnModel model = make_erbpn_model(2, 1, 2, 3, 23);
    TrainConfig cfg;
    EXPECT_THROW(train(model, {}, cfg), ParameterError);

    PatchPair bad{ImagePlane(8, 8, 0.5), ImagePlane(15, 15, 0.5)};
    EXPECT_THROW(train(model, {bad}, cfg), ParameterError);
}

TEST(Train, WritesLossCsvAndCheckpoints) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cascsr_train_test";
    fs::create_directories(dir);

    const ImagePlane hr = ts::textured_image(16, 16, 126);
    ErbpnModel model = make_erbpn_model(2, 1, 2, 3, 24);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.steps_per_epoch = 3;
    cfg.batch_size = 1;
    cfg.patch_size = 8;
    cfg.loss_csv_path = (dir / "loss.csv").string();
    cfg.checkpoint_prefix = (dir / "ckpt").string();
    train(model, {make_bicubic_pair(hr, 2)}, cfg);

    std::ifstream csv(cfg.loss_csv_path);
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "epoch,step,loss");
    int lines = 0;
    for (std::string line; std::getline(csv, line);) ++lines;
    EXPECT_EQ(lines, 6);
    EXPECT_TRUE(fs::exists(dir / "ckpt_epoch0.erbw"));
    EXPECT_TRUE(fs::exists(dir / "ckpt_epoch1.erbw"));
    fs::remove_all(dir);
}
