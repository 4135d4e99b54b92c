import cv2
import numpy as np
import pytest


def write_clip(path, seconds: float, fps: float, size: int = 96) -> int:
    """Write an mp4 whose frames are visually distinct (moving bar over a ramp).
    Returns the frame count."""
    count = int(round(seconds * fps))
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"mp4v"), fps, (size, size)
    )
    assert writer.isOpened(), "mp4v writer unavailable"
    for i in range(count):
        frame = np.full((size, size, 3), 20 + (i * 9) % 200, dtype=np.uint8)
        bar = (i * 7) % (size - 12)
        frame[:, bar : bar + 12] = (255, 64, 16)
        frame[: size // 4] = (i * 13) % 255
        writer.write(frame)
    writer.release()
    return count


def read_clip(path):
    """Decode every frame the way the exporter does."""
    cap = cv2.VideoCapture(str(path))
    assert cap.isOpened()
    frames = []
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        frames.append(frame)
    cap.release()
    return frames


@pytest.fixture(scope="session")
def one_hz_clip(tmp_path_factory):
    """11 frames at 1 fps: timestamps 0..10 s, the windowing golden grid."""
    path = tmp_path_factory.mktemp("clips") / "onehz.mp4"
    count = write_clip(path, seconds=11, fps=1.0)
    assert count == 11
    return path
