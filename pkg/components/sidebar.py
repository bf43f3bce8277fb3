import streamlit as st

from components.elements import bt_delete
from libs.permutation import SIDES
from libs.session_manager import clear_session_series, get_session_series, get_session_test_settings


def render():
    # seeds st.session_state so the widgets below pick up the defaults
    get_session_test_settings()
    with st.sidebar:
        with st.expander("⚙️ Test settings", expanded=True):
            st.number_input("Level α", min_value=0.001, max_value=0.5, step=0.01,
                            format="%.3f", key="alpha")
            st.number_input("Permutations B", min_value=1, max_value=100_000, step=100,
                            key="n_perms")
            st.number_input("Seed", min_value=0, step=1, key="seed")
            st.selectbox("Side", SIDES, key="side")
            st.number_input("Variance floor ε", min_value=1e-8, format="%.0e", key="eps")

        series, source = get_session_series()
        if series is not None:
            with st.expander("🗂️ Loaded series"):
                with st.container(border=True):
                    cols_header = st.columns([4, 1])
                    with cols_header[0]:
                        st.markdown(f"#### n = {series.n}")
                    with cols_header[1]:
                        bt_delete("series", clear_session_series)
                    st.caption(source)
