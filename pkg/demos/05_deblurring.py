# %% [markdown]
# # Restoring a blurred color image
#
# The image is a `rows x columns x 3` tensor. Rows are blurred by a Gaussian
# Toeplitz matrix (r = 7, sigma = 2); columns and channels by uniform Toeplitz
# matrices (r = 2). The blur enters through the Stein operator.
#
# Usage: `python3 demos/05_deblurring.py [image.ppm] [noise]`. Without a file a
# synthetic 64 x 64 picture is used. Restored images are written to the
# current directory.

# %%
import sys
import time
import warnings

from tensorgkb import DiscrepancyConfig, algorithm3, algorithm4
from tensorgkb.imaging import (
    BlurSpec,
    NoiseSpec,
    SingularBlurWarning,
    add_noise,
    build_blur_problem,
    read_ppm,
    relative_error,
    synthetic_image,
    write_ppm,
)

x = read_ppm(sys.argv[1]) if len(sys.argv) > 1 else synthetic_image(64, 64)
noise = float(sys.argv[2]) if len(sys.argv) > 2 else 0.01
h, w, c = x.shape
specs = [BlurSpec("gaussian", h, 7, 2.0), BlurSpec("uniform", w, 2), BlurSpec("uniform", c, 2)]
with warnings.catch_warnings():
    warnings.simplefilter("ignore", SingularBlurWarning)  # the 3 x 3 channel blur is rank one
    op, rhs = build_blur_problem("stein", specs, x)
f, eps = add_noise(rhs, NoiseSpec(noise, seed=0))
print(f"image {h}x{w}x{c}, noise {noise}, eps = {eps:.4e}")

# %%
for alg in (algorithm3, algorithm4):
    t0 = time.perf_counter()
    sol = alg(op, f, DiscrepancyConfig(eps))
    seconds = time.perf_counter() - t0
    print(f"{alg.__name__}: k={sol.k}  e_k={relative_error(sol.x, x):.4e}  {seconds:.2f} s")
    write_ppm(f"restored_{alg.__name__}.ppm", sol.x)
