"""gazesim: active-gaze simulation on equirectangular panoramas.

A desk-scale stack for training gaze policies: spherical view rendering,
a simulated 2-DOF eye, foveated observation machinery, search and
path-distance rewards, replayed-demonstration environments, and
from-scratch PPO + behavior-cloning co-training.
"""

from . import envs, learner
from .foveation import (ObservationPyramid, PyramidConfig, RotaryConfig,
                        TokenLayout, apply_rotary, assign_token_coords,
                        attention_mask, build_pyramid, token_coord_of_direction)
from .gimbal import (GazeState, GimbalConfig, NUM_ACTIONS, STAY_ACTION,
                     action_direction, random_init, step_gaze, teleport)
from .kinematics import (ChainDescription, DHChain, DHJoint, JointTrajectory,
                         builtin_chain_path, denormalize_actions, ee_path,
                         fk_pose, fk_position, load_chain, normalize_actions,
                         save_chain)
from .panorama import (EquirectPanorama, ViewSpec, angles_from_dir,
                       angles_from_pixel, dir_from_angles, equirect_pixel,
                       load_panorama, pixel_directions, render_view,
                       sample_bilinear, save_image, wrap_angle)
from .rewards import (BlockMeanExtractor, FeatureExtractor, TargetAnnotation,
                      bc_reward, discrete_frechet, feature_similarity_reward,
                      read_feature_vectors, truncated_distance_reward,
                      write_feature_vectors)

__version__ = "0.1.0"
