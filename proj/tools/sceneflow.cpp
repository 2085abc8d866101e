#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sf/io.h"
#include "sf/parallel.h"
#include "sf/pipeline.h"
#include "sf/synthetic.h"

namespace fs = std::filesystem;

namespace {

std::string format_index(const std::string& pattern, int index) {
    char buf[1024];
    std::snprintf(buf, sizeof(buf), pattern.c_str(), index);
    return buf;
}

// key = value configuration overrides applied on top of the profile.
void apply_config(sf::Profile* profile, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        std::string key, eq;
        double value = 0;
        if (!(ss >> key)) continue;  // blank line
        if (!(ss >> eq >> value) || eq != "=")
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
        if (key == "working_scale") profile->working_scale = value;
        else if (key == "flow_scale") profile->flow_scale = value;
        else if (key == "max_disparity") profile->stereo.max_disparity = static_cast<int>(value);
        else if (key == "tau_uncertainty") profile->stereo.tau_uncertainty = value;
        else if (key == "lambda_ncc") profile->seg.lambda_ncc = value;
        else if (key == "tau_ncc") profile->seg.tau_ncc = value;
        else if (key == "lambda_flo") profile->seg.lambda_flo = value;
        else if (key == "lambda_col") profile->seg.lambda_col = value;
        else if (key == "lambda_potts") profile->seg.lambda_potts = value;
        else if (key == "lambda_mask") profile->seg.lambda_mask = value;
        else if (key == "lambda_gro") profile->seg.lambda_gro = value;
        else if (key == "superpixels") profile->seg.superpixel_count = static_cast<int>(value);
        else if (key == "grabcut_iterations")
            profile->seg.grabcut_iterations = static_cast<int>(value);
        else if (key == "ground_prior") profile->seg.ground_prior = value != 0;
        else if (key == "forward_candidates") profile->forward_candidates = value != 0;
        else throw std::runtime_error(path + ": unknown config key '" + key + "'");
    }
}

int cmd_run(const std::string& left_pat, const std::string& right_pat, const std::string& calib,
            const std::string& out_dir, const std::string& profile_name,
            const std::string& config, const std::string& prior_pat, int first) {
    sf::Profile profile = sf::Profile::by_name(profile_name);
    if (!config.empty()) apply_config(&profile, config);
    const sf::StereoRig rig = sf::read_calib(calib);
    fs::create_directories(out_dir);

    sf::FrameState state;
    std::vector<sf::Pose> poses;
    int frame = first;
    int written = 0;
    while (fs::exists(format_index(left_pat, frame)) &&
           fs::exists(format_index(left_pat, frame + 1))) {
        const sf::ColorImage left = sf::read_image_png(format_index(left_pat, frame));
        const sf::ColorImage right = sf::read_image_png(format_index(right_pat, frame));
        const sf::ColorImage next_l = sf::read_image_png(format_index(left_pat, frame + 1));
        const sf::ColorImage next_r = sf::read_image_png(format_index(right_pat, frame + 1));

        sf::VectorMap prior;
        sf::MaskMap prior_valid;
        const bool has_prior = !prior_pat.empty() && fs::exists(format_index(prior_pat, frame));
        if (has_prior) sf::read_flow_png(format_index(prior_pat, frame), &prior, &prior_valid);

        const sf::FrameOutput out =
            sf::process_frame(left, right, next_l, next_r, rig, profile, &state,
                              has_prior ? &prior : nullptr, has_prior ? &prior_valid : nullptr);
        if (out.rigid_fallback)
            std::cerr << "frame " << frame << ": rigid-only fallback (" << out.diagnostic
                      << ")\n";

        const std::string idx = format_index("%06d", frame);
        sf::write_disparity_png(out_dir + "/disp_" + idx + ".png", out.disparity);
        sf::write_flow_png(out_dir + "/flow_" + idx + ".png", out.flow, {});
        sf::write_mask_png(out_dir + "/mask_" + idx + ".png", out.mask);
        poses.push_back(out.pose);
        ++frame;
        ++written;
    }
    if (written == 0) {
        std::cerr << "no frame pair found for pattern " << left_pat << " starting at " << first
                  << "\n";
        return 1;
    }
    sf::write_poses(out_dir + "/poses.txt", poses);
    std::cout << "processed " << written << " frames -> " << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& est_dir, const std::string& gt_dir, const std::string& calib) {
    sf::StereoRig rig;
    const bool has_rig = !calib.empty();
    if (has_rig) rig = sf::read_calib(calib);
    std::vector<sf::Pose> poses;
    if (has_rig && fs::exists(est_dir + "/poses.txt")) poses = sf::read_poses(est_dir + "/poses.txt");

    sf::SceneFlowMetrics total;
    int frames = 0;
    // Accumulate by re-running evaluate per frame and averaging rates.
    double d1 = 0, d2 = 0, fl = 0, sfr = 0, d1fg = 0, d2fg = 0, flfg = 0, sffg = 0;
    double d1bg = 0, d2bg = 0, flbg = 0, sfbg = 0;
    for (int frame = 0;; ++frame) {
        const std::string idx = format_index("%06d", frame);
        const std::string est_disp = est_dir + "/disp_" + idx + ".png";
        const std::string gt_disp = gt_dir + "/gt_disp_" + idx + ".png";
        if (!fs::exists(est_disp) || !fs::exists(gt_disp)) break;

        sf::EvalMaps maps;
        maps.est_d1 = sf::read_disparity_png(est_disp);
        maps.gt_d1 = sf::read_disparity_png(gt_disp);
        sf::MaskMap est_mask;
        if (fs::exists(est_dir + "/mask_" + idx + ".png"))
            est_mask = sf::read_mask_png(est_dir + "/mask_" + idx + ".png");
        if (fs::exists(est_dir + "/flow_" + idx + ".png")) {
            sf::MaskMap v;
            sf::read_flow_png(est_dir + "/flow_" + idx + ".png", &maps.est_flow, &v);
        }
        if (fs::exists(gt_dir + "/gt_flow_" + idx + ".png"))
            sf::read_flow_png(gt_dir + "/gt_flow_" + idx + ".png", &maps.gt_flow,
                              &maps.gt_flow_valid);
        if (fs::exists(gt_dir + "/gt_disp2_" + idx + ".png"))
            maps.gt_d2 = sf::read_disparity_png(gt_dir + "/gt_disp2_" + idx + ".png");
        if (fs::exists(gt_dir + "/gt_mask_" + idx + ".png"))
            maps.gt_mask = sf::read_mask_png(gt_dir + "/gt_mask_" + idx + ".png");
        if (has_rig && !maps.gt_d2.empty() && static_cast<size_t>(frame) < poses.size())
            maps.est_d2 = sf::derive_d2(maps.est_d1, est_mask, poses[frame],
                                        sf::scale_rig(rig, maps.est_d1.width(),
                                                      maps.est_d1.height()),
                                        maps.gt_d2);

        const sf::SceneFlowMetrics m = sf::evaluate(maps);
        d1 += m.d1.all; d2 += m.d2.all; fl += m.fl.all; sfr += m.sf.all;
        d1bg += m.d1.bg; d2bg += m.d2.bg; flbg += m.fl.bg; sfbg += m.sf.bg;
        d1fg += m.d1.fg; d2fg += m.d2.fg; flfg += m.fl.fg; sffg += m.sf.fg;
        ++frames;
    }
    if (frames == 0) {
        std::cerr << "no overlapping frames between " << est_dir << " and " << gt_dir << "\n";
        return 1;
    }
    const double n = frames;
    std::printf("%-8s %8s %8s %8s\n", "", "bg", "fg", "all");
    std::printf("%-8s %8.2f %8.2f %8.2f\n", "D1", d1bg / n, d1fg / n, d1 / n);
    std::printf("%-8s %8.2f %8.2f %8.2f\n", "D2", d2bg / n, d2fg / n, d2 / n);
    std::printf("%-8s %8.2f %8.2f %8.2f\n", "Fl", flbg / n, flfg / n, fl / n);
    std::printf("%-8s %8.2f %8.2f %8.2f\n", "SF", sfbg / n, sffg / n, sfr / n);
    (void)total;
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    const sf::SceneSpec spec = sf::load_scene_spec(spec_path);
    const std::vector<sf::FrameTruth> frames = sf::render(spec);
    fs::create_directories(out_dir);
    std::vector<sf::Pose> poses;
    for (size_t t = 0; t < frames.size(); ++t) {
        const std::string idx = format_index("%06d", static_cast<int>(t));
        sf::write_gray_png(out_dir + "/left_" + idx + ".png", frames[t].left);
        sf::write_gray_png(out_dir + "/right_" + idx + ".png", frames[t].right);
        sf::write_disparity_png(out_dir + "/gt_disp_" + idx + ".png", frames[t].gt_disparity);
        sf::write_disparity_png(out_dir + "/gt_disp2_" + idx + ".png", frames[t].gt_disparity2);
        sf::write_flow_png(out_dir + "/gt_flow_" + idx + ".png", frames[t].gt_flow, {});
        sf::write_mask_png(out_dir + "/gt_mask_" + idx + ".png", frames[t].gt_mask);
        poses.push_back(frames[t].gt_pose);
    }
    sf::write_poses(out_dir + "/gt_poses.txt", poses);
    sf::write_calib(out_dir + "/calib.txt", spec.rig);
    std::cout << "rendered " << frames.size() << " frames -> " << out_dir << "\n";
    return 0;
}

int cmd_viz(const std::string& input, const std::string& output) {
    // Flow maps are 16-bit 3-channel; disparity maps 16-bit single channel.
    try {
        sf::VectorMap flow;
        sf::MaskMap valid;
        sf::read_flow_png(input, &flow, &valid);
        sf::write_color_png(output, sf::flow_to_color(flow));
        return 0;
    } catch (const std::exception&) {
    }
    const sf::ScalarMap disp = sf::read_disparity_png(input);
    float max_d = 1.0f;
    for (int y = 0; y < disp.height(); ++y)
        for (int x = 0; x < disp.width(); ++x) max_d = std::max(max_d, disp(x, y));
    sf::GrayImage g(disp.width(), disp.height());
    for (int y = 0; y < disp.height(); ++y)
        for (int x = 0; x < disp.width(); ++x) g(x, y) = disp(x, y) / max_d;
    sf::write_gray_png(output, g);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-frame stereo scene flow with motion segmentation"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker thread count")->capture_default_str();

    auto* run = app.add_subcommand("run", "process a stereo sequence");
    std::string left_pat, right_pat, calib, out_dir, profile = "general", config, prior_pat;
    int first = 0;
    run->add_option("--left", left_pat, "left image printf pattern, e.g. left_%06d.png")
        ->required();
    run->add_option("--right", right_pat, "right image printf pattern")->required();
    run->add_option("--calib", calib, "calibration file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--profile", profile, "general | road | sintel");
    run->add_option("--config", config, "key = value override file");
    run->add_option("--prior-flow", prior_pat, "external prior flow printf pattern");
    run->add_option("--first", first, "first frame index");

    auto* eval = app.add_subcommand("eval", "evaluate estimates against ground truth");
    std::string est_dir, gt_dir, eval_calib;
    eval->add_option("--est", est_dir, "estimate directory")->required();
    eval->add_option("--gt", gt_dir, "ground-truth directory")->required();
    eval->add_option("--calib", eval_calib, "calibration file (enables D2)");

    auto* synth = app.add_subcommand("synth", "render a synthetic sequence");
    std::string spec_path, synth_out;
    synth->add_option("--spec", spec_path, "scene description JSON")->required();
    synth->add_option("--out", synth_out, "output directory")->required();

    auto* viz = app.add_subcommand("viz", "render a disparity/flow map as a color PNG");
    std::string viz_in, viz_out;
    viz->add_option("--input", viz_in, "input map PNG")->required();
    viz->add_option("--out", viz_out, "output PNG")->required();

    CLI11_PARSE(app, argc, argv);
    sf::set_thread_count(threads);
    try {
        if (*run) return cmd_run(left_pat, right_pat, calib, out_dir, profile, config, prior_pat, first);
        if (*eval) return cmd_eval(est_dir, gt_dir, eval_calib);
        if (*synth) return cmd_synth(spec_path, synth_out);
        if (*viz) return cmd_viz(viz_in, viz_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
