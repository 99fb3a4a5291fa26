#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "shallowrl/errors.hpp"
#include "shallowrl/harness.hpp"

namespace py = pybind11;
using namespace shallowrl;

namespace {

using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Frame frame_from_array(const ByteArray& a) {
  if (a.ndim() != 2) throw py::value_error("frames are 2-D arrays of shape (height, width)");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  std::vector<Color> px(a.data(), a.data() + a.size());
  return Frame(w, h, std::move(px));
}

ByteArray frame_to_array(const Frame& f) {
  ByteArray out({f.height(), f.width()});
  std::memcpy(out.mutable_data(), f.pixels().data(), f.size());
  return out;
}

std::vector<FeatureId> ids_of(const ActiveFeatureSet& s) { return {s.begin(), s.end()}; }

ActiveFeatureSet to_set(const std::vector<FeatureId>& ids) { return ActiveFeatureSet(ids); }

std::optional<BackgroundModel> background_from(const std::optional<ByteArray>& a) {
  if (!a) return std::nullopt;
  return BackgroundModel(frame_from_array(*a));
}

ExperimentConfig make_config(const py::kwargs& kw) {
  ExperimentConfig c;
  for (auto item : kw) {
    const auto key = item.first.cast<std::string>();
    const py::handle v = item.second;
    if (key == "features") c.features = v.cast<std::string>();
    else if (key == "env") c.env = v.cast<std::string>();
    else if (key == "trials") c.trials = v.cast<int>();
    else if (key == "episodes") c.train_episodes = v.cast<std::uint64_t>();
    else if (key == "frames") c.train_frames = v.cast<std::uint64_t>();
    else if (key == "eval_episodes") c.eval_episodes = v.cast<int>();
    else if (key == "alpha") c.hp.alpha = v.cast<double>();
    else if (key == "gamma") c.hp.gamma = v.cast<double>();
    else if (key == "lambda_") c.hp.lambda = v.cast<double>();
    else if (key == "epsilon") c.hp.epsilon = v.cast<double>();
    else if (key == "bias") c.hp.bias = v.cast<bool>();
    else if (key == "eval_epsilon") c.eval_epsilon = v.cast<double>();
    else if (key == "clip_reward") c.clip_reward = v.cast<bool>();
    else if (key == "frame_skip") c.decision.frame_skip = v.cast<int>();
    else if (key == "max_noops") c.decision.max_noops = v.cast<int>();
    else if (key == "max_frames_per_episode") c.decision.max_frames_per_episode = v.cast<std::uint64_t>();
    else if (key == "action_set") c.decision.action_set = parse_action_set(v.cast<std::string>());
    else if (key == "blob_s") c.blob_tolerance = v.cast<int>();
    else if (key == "seed") c.seed = v.cast<std::uint64_t>();
    else if (key == "background") c.background_path = v.cast<std::string>();
    else if (key == "background_samples") c.background_samples = v.cast<int>();
    else if (key == "out") c.out_dir = v.cast<std::string>();
    else if (key == "workers") c.workers = v.cast<int>();
    else throw py::type_error("unknown experiment option '" + key + "'");
  }
  c.validate();
  return c;
}

py::dict episode_dict(const EpisodeRecord& e) {
  py::dict d;
  d["score"] = e.score;
  d["frames"] = e.frames;
  d["decisions"] = e.decisions;
  return d;
}

py::dict trial_dict(const TrialResult& r) {
  py::dict d;
  d["trial"] = r.trial;
  d["seed"] = r.seed;
  py::list train, eval;
  for (const auto& e : r.train) train.append(episode_dict(e));
  for (const auto& e : r.eval) eval.append(episode_dict(e));
  d["train"] = train;
  d["eval"] = eval;
  d["eval_mean"] = r.eval_mean();
  d["weights_path"] = r.weights_path;
  d["slots"] = r.slot_count;
  return d;
}

py::dict summary_dict(const TrialSummary& s) {
  py::dict d;
  d["trials"] = s.trials;
  d["mean"] = s.mean;
  d["stddev"] = s.stddev;
  d["best_trial"] = s.best_trial;
  d["best"] = s.best;
  d["middle_trial"] = s.middle_trial;
  d["middle"] = s.middle;
  d["worst"] = s.worst;
  return d;
}

// Decision-level environment with numpy frames.
class PyEnv {
 public:
  PyEnv(const std::string& name, int frame_skip, int max_noops, std::uint64_t max_frames, const std::string& action_set)
      : process_(make_decision_process(make_environment(name),
                                       DecisionConfig{frame_skip, max_noops, max_frames, parse_action_set(action_set)})) {}

  ByteArray reset(std::uint64_t seed) { return frame_to_array(*process_->reset(seed).frame); }

  py::tuple step(int action) {
    const auto p = process_->step(action);
    return py::make_tuple(frame_to_array(*p.frame), p.reward, p.terminal);
  }

  int action_count() const { return process_->action_count(); }

 private:
  std::unique_ptr<DecisionProcess> process_;
};

}  // namespace

PYBIND11_MODULE(_shallowrl, m) {
  m.doc() = "Sparse screen features and Sarsa(lambda) for frame-based games";
  m.attr("__version__") = SHALLOWRL_VERSION;

  py::register_exception<FeatureError>(m, "FeatureError", PyExc_ValueError);
  py::register_exception<ScreenError>(m, "ScreenError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  m.def("count_distinct_features", [](const std::string& name) { return count_distinct_features(name); },
        py::arg("feature_set"));

  m.def(
      "detect_blobs",
      [](const ByteArray& frame, int s) {
        py::list out;
        for (const auto& b : detect_blobs(frame_from_array(frame), s))
          out.append(py::make_tuple(int(b.color), b.x_min, b.x_max, b.y_min, b.y_max, b.pixel_count));
        return out;
      },
      py::arg("frame"), py::arg("s") = kDefaultBlobTolerance,
      "Blobs as (color, x_min, x_max, y_min, y_max, pixels) in raster order of first pixel.");

  m.def(
      "compute_background",
      [](const std::vector<ByteArray>& frames) {
        std::vector<Frame> fs;
        for (const auto& f : frames) fs.push_back(frame_from_array(f));
        return frame_to_array(compute_background(fs).image());
      },
      py::arg("frames"));

  py::class_<FeatureExtractor>(m, "FeatureExtractor")
      .def(py::init([](const std::string& kind, const std::optional<ByteArray>& background, int s) {
             return FeatureExtractor(parse_feature_set(kind), background_from(background), s);
           }),
           py::arg("features"), py::arg("background") = py::none(), py::arg("blob_s") = kDefaultBlobTolerance)
      .def("begin_episode", &FeatureExtractor::begin_episode)
      .def("extract", [](FeatureExtractor& x, const ByteArray& frame) { return ids_of(x.extract(frame_from_array(frame))); });

  py::class_<LinearQ>(m, "LinearQ")
      .def(py::init([](int actions, double alpha, double gamma, double lambda, double epsilon, bool bias) {
             Hyperparameters hp;
             hp.alpha = alpha;
             hp.gamma = gamma;
             hp.lambda = lambda;
             hp.epsilon = epsilon;
             hp.bias = bias;
             return LinearQ(actions, hp);
           }),
           py::arg("actions"), py::arg("alpha") = 0.5, py::arg("gamma") = 0.99, py::arg("lambda_") = 0.9,
           py::arg("epsilon") = 0.01, py::arg("bias") = true)
      .def_property_readonly("action_count", &LinearQ::action_count)
      .def_property_readonly("slot_count", &LinearQ::slot_count)
      .def("q_values", [](const LinearQ& q, const std::vector<FeatureId>& ids) { return q.q_values(to_set(ids)); })
      .def(
          "update",
          [](LinearQ& q, const std::vector<FeatureId>& phi, int a, double r, const std::vector<FeatureId>& next,
             int next_a, bool terminal) {
            const auto s = to_set(phi);
            const auto s2 = to_set(next);
            q.sarsa_update({s, a, r, s2, next_a, terminal});
          },
          py::arg("features"), py::arg("action"), py::arg("reward"), py::arg("next_features"),
          py::arg("next_action"), py::arg("terminal"))
      .def("reset_traces", &LinearQ::reset_traces)
      .def("save", [](const LinearQ& q) {
        const auto bytes = q.save();
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      })
      .def_static("load", [](const py::bytes& b) {
        const std::string s = b;
        return LinearQ::load(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      });

  py::class_<PyEnv>(m, "Env")
      .def(py::init<const std::string&, int, int, std::uint64_t, const std::string&>(), py::arg("name"),
           py::arg("frame_skip") = 5, py::arg("max_noops") = 30, py::arg("max_frames_per_episode") = 18000,
           py::arg("action_set") = "minimal")
      .def_property_readonly("action_count", &PyEnv::action_count)
      .def("reset", &PyEnv::reset, py::arg("seed"))
      .def("step", &PyEnv::step, py::arg("action"));

  m.def(
      "run_trial",
      [](int trial, const py::kwargs& kw) {
        const auto c = make_config(kw);
        TrialResult r;
        {
          py::gil_scoped_release release;
          r = run_trial(c, trial);
        }
        return trial_dict(r);
      },
      py::arg("trial") = 0);

  m.def("run_experiment", [](const py::kwargs& kw) {
    const auto c = make_config(kw);
    ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(c);
    }
    py::dict d;
    py::list trials;
    for (const auto& t : r.trials) trials.append(trial_dict(t));
    d["trials"] = trials;
    d["summary"] = summary_dict(r.summary);
    return d;
  });

  m.def(
      "benchmark",
      [](double seconds, const py::kwargs& kw) {
        const auto c = make_config(kw);
        BenchReport r;
        {
          py::gil_scoped_release release;
          r = benchmark_throughput(c, seconds);
        }
        py::dict d;
        d["seconds"] = r.seconds;
        d["decisions"] = r.decisions;
        d["decisions_per_second"] = r.decisions_per_second;
        d["frames_per_second"] = r.frames_per_second;
        d["mean_active_features"] = r.mean_active_features;
        d["max_active_features"] = r.max_active_features;
        d["slots"] = r.slot_count;
        return d;
      },
      py::arg("seconds"));

  m.def("summarize_trials", [](const std::vector<double>& means) { return summary_dict(summarize_trials(means)); });

  m.def("welch_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
    const auto w = welch_t_test(a, b);
    return py::make_tuple(w.t, w.df, w.p);
  });
}
