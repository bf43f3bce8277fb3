import streamlit as st

from components import sidebar
from config import settings
from styles.styler import page_css

st.set_page_config(page_title="trendperm", layout="centered")
settings.configure_logging()

# LOAD CSS
st.markdown(f'<style>{page_css()}</style>', unsafe_allow_html=True)

pages = {
    "TESTS": [
        st.Page("tools/1_trend_test.py", title="Trend test", icon="📈"),
        st.Page("tools/2_simulate.py", title="Simulate", icon="🎲"),
    ],
    "STUDIES": [
        st.Page("tools/3_experiment.py", title="Experiment", icon="🧪"),
        st.Page("tools/4_power.py", title="Local power", icon="⚡"),
    ],
}
sidebar.render()

nav = st.navigation(pages)
nav.run()
